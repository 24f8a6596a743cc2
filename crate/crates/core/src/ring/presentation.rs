use std::collections::HashMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::linear::LinearTerm;
use crate::num::{lcm, Int, Rat};
use crate::padic::{BoxCell, Coord, PAdicContext, PadicError, Weight};
use crate::presburger::Formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("presentations differ in prime, parameters or parameter domain")]
    ContextMismatch,
    #[error("generator {generator}: measure diverges along `{var}`")]
    Diverges { generator: usize, var: String },
    #[error("generator {generator}: {source}")]
    Generator { generator: usize, source: PadicError },
    #[error("{0}")]
    Input(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub coeff: Rat,
    pub cell: BoxCell,
}

/// A rational combination of box cells over a Presburger parameter domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub ctx: PAdicContext,
    pub param_vars: Vec<String>,
    pub param_domain: Formula,
    pub generators: Vec<Generator>,
}

/// Default valuation variable names `l1..ln`.
pub fn default_lambda_vars(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("l{i}")).collect()
}

impl Presentation {
    pub fn zero(ctx: PAdicContext, param_vars: Vec<String>, param_domain: Formula) -> Self {
        Presentation { ctx, param_vars, param_domain, generators: Vec::new() }
    }

    /// Same context, parameters and domain, with the given generators.
    pub fn with_generators(&self, generators: Vec<Generator>) -> Self {
        Presentation { generators, ..self.clone() }
    }

    pub fn p(&self) -> &Int {
        self.ctx.p()
    }

    fn same_context(&self, o: &Presentation) -> Result<(), RingError> {
        if self.ctx != o.ctx || self.param_vars != o.param_vars || self.param_domain != o.param_domain {
            return Err(RingError::ContextMismatch);
        }
        Ok(())
    }

    /// `[ℤ_p^0]`, the unit: one point with measure one.
    pub fn unit_cell() -> BoxCell {
        BoxCell { coords: Vec::new(), lambda_vars: Vec::new(), lambda: Formula::True, weight: None }
    }

    pub fn one(&self) -> Self {
        self.with_generators(vec![Generator { coeff: Rat::one(), cell: Self::unit_cell() }])
    }

    /// `q` times the unit.
    pub fn constant(&self, q: Rat) -> Self {
        self.one().scalar_mul(&q)
    }

    /// `P(Δ_n)`: the diagonal `λ_1 = ... = λ_n >= 0` with `ac = 1`.
    pub fn delta_cell(n: usize) -> BoxCell {
        let vars = default_lambda_vars(n);
        let mut parts = vec![Formula::geq(LinearTerm::var(&vars[0]))];
        for v in &vars[1..] {
            parts.push(Formula::eq0(LinearTerm::var(v).sub(&LinearTerm::var(&vars[0]))));
        }
        BoxCell {
            coords: (0..n).map(|_| Coord::unit(Rat::zero())).collect(),
            lambda_vars: vars,
            lambda: Formula::and(parts),
            weight: None,
        }
    }

    /// `p^c ℤ_p` as the `p - 1` angular-component classes of `λ >= c`
    /// (the centre itself is a null set).
    pub fn ball_generators(p: &Int, c: i64) -> Vec<Generator> {
        let mut out = Vec::new();
        let mut a = Int::one();
        while &a < p {
            out.push(Generator {
                coeff: Rat::one(),
                cell: BoxCell {
                    coords: vec![Coord::Box { center: Rat::zero(), level: 1, ac: a.clone() }],
                    lambda_vars: default_lambda_vars(1),
                    lambda: Formula::geq(LinearTerm::var("l1").add_constant(&Int::from(-c))),
                    weight: None,
                },
            });
            a += 1;
        }
        out
    }

    /// `1 + pℤ_p`: valuation 0 and angular component 1.
    pub fn one_plus_p_cell() -> BoxCell {
        BoxCell {
            coords: vec![Coord::unit(Rat::zero())],
            lambda_vars: default_lambda_vars(1),
            lambda: Formula::eq0(LinearTerm::var("l1")),
            weight: None,
        }
    }

    pub fn add(&self, o: &Presentation) -> Result<Self, RingError> {
        self.same_context(o)?;
        let mut g = self.generators.clone();
        g.extend(o.generators.iter().cloned());
        Ok(self.with_generators(g))
    }

    pub fn scalar_mul(&self, q: &Rat) -> Self {
        if q.is_zero() {
            return self.with_generators(Vec::new());
        }
        self.with_generators(
            self.generators.iter().map(|g| Generator { coeff: &g.coeff * q, cell: g.cell.clone() }).collect(),
        )
    }

    pub fn neg(&self) -> Self {
        self.scalar_mul(&-Rat::one())
    }

    pub fn sub(&self, o: &Presentation) -> Result<Self, RingError> {
        self.add(&o.neg())
    }

    pub fn multiply(&self, o: &Presentation) -> Result<Self, RingError> {
        self.same_context(o)?;
        let mut g = Vec::new();
        for a in &self.generators {
            for b in &o.generators {
                g.push(Generator { coeff: &a.coeff * &b.coeff, cell: fiber_product(&a.cell, &b.cell) });
            }
        }
        Ok(self.with_generators(g))
    }
}

fn rename_cell(c: &BoxCell, suffix: &str) -> (BoxCell, Vec<String>) {
    let names: Vec<String> = c.lambda_vars.iter().map(|v| format!("{v}_{suffix}")).collect();
    let map: HashMap<String, String> = c.lambda_vars.iter().cloned().zip(names.iter().cloned()).collect();
    let cell = BoxCell {
        coords: c.coords.clone(),
        lambda_vars: names.clone(),
        lambda: c.lambda.rename(&map),
        weight: c.weight.clone(),
    };
    (cell, names)
}

/// The weight of a cell in `P(Λ, ν)` form; an unweighted cell of `n` box
/// coordinates has `ν = -Σλ - n`.
pub fn explicit_weight(c: &BoxCell) -> Weight {
    match &c.weight {
        Some(w) => w.clone(),
        None => {
            let n = c.lambda_vars.len();
            Weight { r: Int::one(), c: LinearTerm::constant(-(n as i64)), b: vec![-Int::one(); n] }
        }
    }
}

/// `X ×_S Y` on disjoint valuation variables; weights add.
pub fn fiber_product(a: &BoxCell, b: &BoxCell) -> BoxCell {
    let (a, na) = rename_cell(a, "1");
    let (b, nb) = rename_cell(b, "2");
    let weight = if a.weight.is_none() && b.weight.is_none() {
        None
    } else {
        let (wa, wb) = (explicit_weight(&a), explicit_weight(&b));
        let r = lcm(&wa.r, &wb.r);
        let (ka, kb) = (&r / &wa.r, &r / &wb.r);
        let mut bs: Vec<Int> = wa.b.iter().map(|x| x * &ka).collect();
        bs.extend(wb.b.iter().map(|x| x * &kb));
        Some(Weight { r, c: wa.c.scale(&ka).add(&wb.c.scale(&kb)), b: bs })
    };
    let mut coords = a.coords.clone();
    coords.extend(b.coords.iter().cloned());
    let mut vars = na;
    vars.extend(nb);
    BoxCell { coords, lambda_vars: vars, lambda: Formula::and([a.lambda, b.lambda]), weight }
}

/// Lcm of the coefficient denominators.
pub fn coefficient_denominator(gs: &[Generator]) -> Int {
    gs.iter().fold(Int::one(), |d, g| lcm(&d, g.coeff.denom()))
}
