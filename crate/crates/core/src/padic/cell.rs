use std::fmt;

use num_traits::{One, Signed, Zero};

use super::{PAdicContext, PadicError};
use crate::linear::{LinearTerm, QAffine};
use crate::num::{format_rat, Int, Rat};
use crate::presburger::{qe, Atom, Formula};
use crate::semilinear::disjoint_dnf;

/// One coordinate of a box cell: `v(x - center) = λ_i` and
/// `ac_level(x - center) = ac`, or the single point `x = c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Coord {
    Box { center: Rat, level: u32, ac: Int },
    Degenerate(Rat),
}

impl Coord {
    pub fn unit(center: Rat) -> Coord {
        Coord::Box { center, level: 1, ac: Int::one() }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::Box { center, level, ac } => {
                write!(f, "(center {}, level {level}, ac {ac})", format_rat(center))
            }
            Coord::Degenerate(c) => write!(f, "(point {})", format_rat(c)),
        }
    }
}

/// `ν(s, λ) = (c(s) + Σ b_i λ_i) / r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Weight {
    pub r: Int,
    pub c: LinearTerm,
    pub b: Vec<Int>,
}

impl Weight {
    pub fn zero(n: usize) -> Weight {
        Weight { r: Int::one(), c: LinearTerm::zero(), b: vec![Int::zero(); n] }
    }

    /// `r * ν` as an integer affine form.
    pub fn numerator(&self, lambda_vars: &[String]) -> LinearTerm {
        let mut t = self.c.clone();
        for (v, b) in lambda_vars.iter().zip(&self.b) {
            t = t.add(&LinearTerm::monomial(v, b.clone()));
        }
        t
    }

    pub fn exponent(&self, lambda_vars: &[String]) -> QAffine {
        self.numerator(lambda_vars).to_qaffine().scale(&Rat::new(Int::one(), self.r.clone()))
    }

    pub fn depends_on_lambda(&self) -> bool {
        self.b.iter().any(|b| !b.is_zero())
    }
}

/// A box cell together with its valuation condition Λ and optional weight.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoxCell {
    pub coords: Vec<Coord>,
    /// One name per non-degenerate coordinate, in order.
    pub lambda_vars: Vec<String>,
    pub lambda: Formula,
    pub weight: Option<Weight>,
}

impl BoxCell {
    pub fn dims(&self) -> usize {
        self.coords.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.coords.iter().any(|c| matches!(c, Coord::Degenerate(_)))
    }

    /// Levels of the non-degenerate coordinates.
    pub fn levels(&self) -> Vec<u32> {
        self.coords
            .iter()
            .filter_map(|c| match c {
                Coord::Box { level, .. } => Some(*level),
                Coord::Degenerate(_) => None,
            })
            .collect()
    }

    pub fn validate(&self, ctx: &PAdicContext) -> Result<(), PadicError> {
        let boxes = self.levels().len();
        if boxes != self.lambda_vars.len() {
            return Err(PadicError::Input(format!(
                "{} valuation variables for {boxes} non-degenerate coordinates",
                self.lambda_vars.len()
            )));
        }
        for c in &self.coords {
            if let Coord::Box { level, ac, .. } = c {
                if *level == 0 {
                    return Err(PadicError::Input("level must be at least 1".into()));
                }
                if !ctx.is_unit_residue(ac) {
                    return Err(PadicError::Input(format!("ac value {ac} is not a unit mod p")));
                }
            }
        }
        if let Some(w) = &self.weight {
            if !w.r.is_positive() {
                return Err(PadicError::Input("weight denominator must be positive".into()));
            }
            if w.b.len() != self.lambda_vars.len() {
                return Err(PadicError::Input(format!(
                    "weight has {} coefficients for {} valuation variables",
                    w.b.len(),
                    self.lambda_vars.len()
                )));
            }
            if w.c.vars().any(|v| self.lambda_vars.contains(v)) {
                return Err(PadicError::Input("weight constant part may not use λ".into()));
            }
        }
        Ok(())
    }

    /// Exponent `w` with `μ(cell_s) = Σ_{λ ∈ Λ_s} p^w` for a cell without
    /// degenerate coordinates, as a weight over `lambda_vars`.
    pub fn total_weight(&self) -> Weight {
        let levels = self.levels();
        let n = self.lambda_vars.len();
        match &self.weight {
            // P(Λ, ν): Σ p^ν, each level-ℓ condition costing p^(1-ℓ).
            Some(w) => {
                let shift: i64 = levels.iter().map(|l| 1 - i64::from(*l)).sum();
                Weight { r: w.r.clone(), c: w.c.add_constant(&(&w.r * Int::from(shift))), b: w.b.clone() }
            }
            None => {
                let shift: i64 = levels.iter().map(|l| -i64::from(*l)).sum();
                Weight { r: Int::one(), c: LinearTerm::constant(shift), b: vec![-Int::one(); n] }
            }
        }
    }
}

/// The measure of a cell as a weighted lattice sum, or zero.
#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum CellSum {
    MeasureZero,
    Weighted { lambda: Formula, lambda_vars: Vec<String>, weight: Weight },
}

/// Rewrites a cell's measure as `Σ_{λ ∈ Λ'} p^{w(s, λ)}`; degenerate cells
/// are null sets.
pub fn cell_to_weighted_sum(cell: &BoxCell, param_domain: &Formula, ctx: &PAdicContext) -> Result<CellSum, PadicError> {
    cell.validate(ctx)?;
    if cell.is_degenerate() {
        return Ok(CellSum::MeasureZero);
    }
    let lambda = qe(&cell.lambda);
    if let Some(w) = &cell.weight {
        if !w.r.is_one() {
            let num = w.numerator(&cell.lambda_vars);
            let bad = Formula::and([
                lambda.clone(),
                qe(param_domain),
                Formula::not(Formula::Atom(Atom::Div(w.r.clone(), num))),
            ]);
            if !disjoint_dnf(&bad.simplify()).is_empty() {
                return Err(PadicError::Input("weight is not integral on Λ".into()));
            }
        }
    }
    Ok(CellSum::Weighted { lambda, lambda_vars: cell.lambda_vars.clone(), weight: cell.total_weight() })
}
