use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::PadicError;
use crate::linear::QAffine;
use crate::num::{pow_rat, Int, Rat};
use crate::poly::Poly;
use crate::presburger::{Atom, Formula};
use crate::semilinear::{simplify_conj, Piece, Summand};

/// `poly(s) * p^(exp(s))` on the points where every guard atom holds.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExpTerm {
    pub guard: Vec<Atom>,
    pub poly: Poly,
    pub exp: QAffine,
}

impl ExpTerm {
    pub fn holds(&self, env: &dyn Fn(&str) -> Option<Int>) -> bool {
        self.guard.iter().all(|a| a.eval(env).unwrap_or(false))
    }

    pub fn value(&self, env: &dyn Fn(&str) -> Option<Int>, p: &Int) -> Result<Rat, PadicError> {
        let e = self.exp.eval(env).map_err(|v| PadicError::Input(format!("`{v}` is unassigned")))?;
        if !e.is_integer() {
            return Err(PadicError::Input(format!("exponent {} is not an integer here", self.exp)));
        }
        let c = self.poly.eval_int(env).map_err(|v| PadicError::Input(format!("`{v}` is unassigned")))?;
        Ok(c * pow_rat(p, &e.to_integer()))
    }
}

/// A finite sum of guarded exponential-polynomial terms. Guards may
/// overlap; the value at a point is the sum over the terms whose guards
/// hold there.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExpPolynomial {
    pub terms: Vec<ExpTerm>,
}

impl ExpPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rat) -> Self {
        ExpPolynomial { terms: vec![ExpTerm { guard: Vec::new(), poly: Poly::constant(c), exp: QAffine::zero() }] }
            .canonical()
    }

    /// Collects the surviving pieces of an elimination.
    pub fn from_pieces(pieces: Vec<Piece>, p: &Int) -> Self {
        let mut terms = Vec::new();
        for pc in pieces {
            for Summand { poly, exp } in pc.terms {
                let s = Summand::new(poly, exp).fold_constant(p);
                terms.push(ExpTerm { guard: pc.atoms.clone(), poly: s.poly, exp: s.exp });
            }
        }
        ExpPolynomial { terms }.canonical()
    }

    /// Merges terms with equal guard and exponent, drops zero terms and
    /// sorts.
    pub fn canonical(&self) -> Self {
        let mut merged: BTreeMap<(Vec<Atom>, QAffine), Poly> = BTreeMap::new();
        for t in &self.terms {
            let Some(guard) = simplify_conj(t.guard.iter().cloned()) else { continue };
            let e = merged.entry((guard, t.exp.clone())).or_insert_with(Poly::zero);
            *e = e.add(&t.poly);
        }
        let terms = merged
            .into_iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|((guard, exp), poly)| ExpTerm { guard, poly, exp })
            .collect();
        ExpPolynomial { terms }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &ExpPolynomial) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        ExpPolynomial { terms }.canonical()
    }

    pub fn scale(&self, q: &Rat) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        let terms = self
            .terms
            .iter()
            .map(|t| ExpTerm { guard: t.guard.clone(), poly: t.poly.scale(q), exp: t.exp.clone() })
            .collect();
        ExpPolynomial { terms }
    }

    pub fn sub(&self, o: &ExpPolynomial) -> Self {
        self.add(&o.scale(&-Rat::from_integer(Int::from(1))))
    }

    pub fn mul(&self, o: &ExpPolynomial, p: &Int) -> Self {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &o.terms {
                let mut guard = a.guard.clone();
                guard.extend(b.guard.iter().cloned());
                let s = Summand::new(a.poly.mul(&b.poly), a.exp.add(&b.exp)).fold_constant(p);
                terms.push(ExpTerm { guard, poly: s.poly, exp: s.exp });
            }
        }
        ExpPolynomial { terms }.canonical()
    }

    /// Sum of the terms whose guards hold, zero if none does.
    pub fn eval_or_zero(&self, env: &dyn Fn(&str) -> Option<Int>, p: &Int) -> Result<Rat, PadicError> {
        let mut acc = Rat::zero();
        for t in &self.terms {
            if t.holds(env) {
                acc += t.value(env, p)?;
            }
        }
        Ok(acc)
    }

    /// Exact value at a point that lies in at least one guard.
    pub fn eval(&self, env: &dyn Fn(&str) -> Option<Int>, p: &Int) -> Result<Rat, PadicError> {
        if !self.terms.iter().any(|t| t.holds(env)) {
            return Err(PadicError::OutOfDomain);
        }
        self.eval_or_zero(env, p)
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for t in &self.terms {
            out.extend(t.poly.vars());
            out.extend(t.exp.vars().cloned());
            for a in &t.guard {
                out.extend(a.term().vars().cloned());
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for ExpPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return writeln!(f, "0");
        }
        for t in &self.terms {
            let g = Formula::conj_atoms(t.guard.iter().cloned());
            writeln!(f, "sum[ {g} ; {} ; p^({}) ]", t.poly, t.exp)?;
        }
        Ok(())
    }
}
