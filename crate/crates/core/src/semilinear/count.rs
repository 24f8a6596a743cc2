use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::cells::{complement, disjoint_dnf, refine, GuardedCell};
use super::elim::{satisfiable, simplify_conj, sum_out, ElimError, Piece, Summand};
use crate::linear::QAffine;
use crate::num::{Int, Rat};
use crate::poly::Poly;
use crate::presburger::{Atom, Formula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("fiber is infinite along `{0}`")]
    InfiniteFiber(String),
}

/// Polynomials on pairwise disjoint parameter guards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewisePolynomial {
    pub pieces: Vec<(Formula, Poly)>,
}

impl PiecewisePolynomial {
    /// Value at a parameter point; `None` outside every guard.
    pub fn eval(&self, env: &dyn Fn(&str) -> Option<Int>) -> Option<Rat> {
        for (g, p) in &self.pieces {
            let inside = g.atoms().iter().all(|a| a.eval(env).unwrap_or(false));
            if inside {
                return p.eval_int(env).ok();
            }
        }
        None
    }
}

impl fmt::Display for PiecewisePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (g, p) in &self.pieces {
            writeln!(f, "{p}  if  {g}")?;
        }
        Ok(())
    }
}

/// Groups overlapping guarded values into a disjoint refinement of
/// `domain`; each region carries the sum of the values whose guards
/// contain it.
pub fn disjoint_refinement<T: Clone>(
    domain: Vec<Vec<Atom>>,
    guarded: &[(Vec<Atom>, T)],
    zero: T,
    plus: &dyn Fn(&T, &T) -> T,
) -> Vec<(Vec<Atom>, T)> {
    let mut regions: Vec<(Vec<Atom>, T)> = domain.into_iter().map(|d| (d, zero.clone())).collect();
    for (g, v) in guarded {
        let mut next = Vec::new();
        for (r, acc) in regions {
            let mut both = r.clone();
            both.extend(g.iter().cloned());
            let Some(both) = simplify_conj(both) else {
                next.push((r, acc));
                continue;
            };
            if !satisfiable(&both) {
                next.push((r, acc));
                continue;
            }
            let outside = refine(vec![r.clone()], &complement(g));
            next.push((both, plus(&acc, v)));
            next.extend(outside.into_iter().map(|o| (o, acc.clone())));
        }
        regions = next;
    }
    regions
}

/// Cardinality of each fiber as a polynomial on congruence-refined pieces
/// of the parameter domain.
pub fn count_parametric(cells: &[GuardedCell], param_domain: &Formula) -> Result<PiecewisePolynomial, CountError> {
    let domain = disjoint_dnf(param_domain);
    let two = Int::from(2);
    let mut guarded: BTreeMap<Vec<Atom>, Poly> = BTreeMap::new();
    for cell in cells {
        for d in &domain {
            let mut atoms = cell.all_atoms();
            atoms.extend(d.iter().cloned());
            let mut pieces = vec![Piece { atoms, terms: vec![Summand::new(Poly::one(), QAffine::zero())] }];
            for x in cell.variables.iter().rev() {
                let mut next = Vec::new();
                for pc in &pieces {
                    match sum_out(pc, x, &two) {
                        Ok(v) => next.extend(v),
                        Err(ElimError::Diverges(v)) => return Err(CountError::InfiniteFiber(v)),
                    }
                }
                pieces = next;
            }
            for pc in pieces {
                let total = pc.terms.iter().fold(Poly::zero(), |acc, t| acc.add(&t.poly));
                let e = guarded.entry(pc.atoms).or_insert_with(Poly::zero);
                *e = e.add(&total);
            }
        }
    }
    let guarded: Vec<(Vec<Atom>, Poly)> = guarded.into_iter().collect();
    let regions = disjoint_refinement(domain, &guarded, Poly::zero(), &|a, b| a.add(b));
    Ok(PiecewisePolynomial { pieces: regions.into_iter().map(|(g, p)| (Formula::conj_atoms(g), p)).collect() })
}
