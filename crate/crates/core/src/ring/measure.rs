use std::collections::{BTreeMap, HashMap};

use crate::num::{Int, Rat};
use crate::padic::{
    cell_to_weighted_sum, exp_poly_is_zero, sum_closed_form, BoxCell, CellSum, ExpPolynomial, PAdicContext, PadicError,
    ZeroTest,
};
use crate::presburger::{evaluate_qf, Formula};

use super::{Presentation, RingError};

/// `s ↦ μ_s(Ξ)` on the parameter domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureFunction {
    pub ctx: PAdicContext,
    pub param_vars: Vec<String>,
    pub domain: Formula,
    pub expr: ExpPolynomial,
}

impl MeasureFunction {
    /// Exact value at a point of the domain.
    pub fn eval(&self, point: &BTreeMap<String, Int>) -> Result<Rat, PadicError> {
        if let Some(v) = self.param_vars.iter().find(|v| !point.contains_key(*v)) {
            return Err(PadicError::Input(format!("no value for parameter `{v}`")));
        }
        if !evaluate_qf(&crate::presburger::qe(&self.domain), point).unwrap_or(false) {
            return Err(PadicError::OutOfDomain);
        }
        self.expr.eval_or_zero(&|v| point.get(v).cloned(), self.ctx.p())
    }

    /// Whether the function vanishes on the whole domain.
    pub fn is_zero(&self) -> ZeroTest {
        exp_poly_is_zero(&self.expr, &self.domain, &self.ctx)
    }
}

/// Measure function of one cell with coefficient one.
pub fn cell_measure(cell: &BoxCell, domain: &Formula, ctx: &PAdicContext) -> Result<ExpPolynomial, PadicError> {
    match cell_to_weighted_sum(cell, domain, ctx)? {
        CellSum::MeasureZero => Ok(ExpPolynomial::zero()),
        CellSum::Weighted { lambda, lambda_vars, weight } => {
            sum_closed_form(&lambda, &lambda_vars, &weight, domain, ctx)
        }
    }
}

fn lift(generator: usize, e: PadicError) -> RingError {
    match e {
        PadicError::Diverges(var) => RingError::Diverges { generator, var },
        source => RingError::Generator { generator, source },
    }
}

/// Incremental measure computation that remembers every cell seen.
#[derive(Default)]
pub struct MeasureCache {
    cells: HashMap<BoxCell, ExpPolynomial>,
}

impl MeasureCache {
    pub fn measure(&mut self, xi: &Presentation) -> Result<MeasureFunction, RingError> {
        let mut expr = ExpPolynomial::zero();
        for (i, g) in xi.generators.iter().enumerate() {
            let e = match self.cells.get(&g.cell) {
                Some(e) => e.clone(),
                None => {
                    let e = cell_measure(&g.cell, &xi.param_domain, &xi.ctx).map_err(|e| lift(i, e))?;
                    self.cells.insert(g.cell.clone(), e.clone());
                    e
                }
            };
            expr = expr.add(&e.scale(&g.coeff));
        }
        Ok(MeasureFunction {
            ctx: xi.ctx.clone(),
            param_vars: xi.param_vars.clone(),
            domain: xi.param_domain.clone(),
            expr: expr.canonical(),
        })
    }
}

pub fn measure_function(xi: &Presentation) -> Result<MeasureFunction, RingError> {
    MeasureCache::default().measure(xi)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equality {
    Equal,
    NotEqual { witness: Vec<(String, Int)>, v1: Rat, v2: Rat },
}

/// Decides `Ξ1 = Ξ2` by testing `μ(Ξ1) - μ(Ξ2)` for identical vanishing.
pub fn decide_equal(a: &Presentation, b: &Presentation) -> Result<Equality, RingError> {
    let diff = a.sub(b)?;
    let mut cache = MeasureCache::default();
    let mf = cache.measure(&diff)?;
    match mf.is_zero() {
        ZeroTest::Zero => Ok(Equality::Equal),
        ZeroTest::NonZero(witness) => {
            let point: BTreeMap<String, Int> = witness.iter().cloned().collect();
            let at = |x: &Presentation, cache: &mut MeasureCache| -> Result<Rat, RingError> {
                let m = cache.measure(x)?;
                m.expr.eval_or_zero(&|v| point.get(v).cloned(), x.p()).map_err(|e| lift(0, e))
            };
            let v1 = at(a, &mut cache)?;
            let v2 = at(b, &mut cache)?;
            Ok(Equality::NotEqual { witness, v1, v2 })
        }
    }
}
