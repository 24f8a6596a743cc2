use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::PadicError;
use crate::num::{is_prime, modulo, Int, Rat};

/// The residue characteristic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PAdicContext {
    p: Int,
}

/// `v(q)`, with `Infinite` for zero.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Valuation {
    Finite(Int),
    Infinite,
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

fn int_valuation(n: &Int, p: &Int) -> (Int, Int) {
    let mut n = n.clone();
    let mut k = Int::zero();
    while (&n % p).is_zero() {
        n /= p;
        k += 1;
    }
    (k, n)
}

impl PAdicContext {
    pub fn new(p: impl Into<Int>) -> Result<Self, PadicError> {
        let p = p.into();
        if !is_prime(&p) {
            return Err(PadicError::NotPrime(p));
        }
        Ok(PAdicContext { p })
    }

    pub fn p(&self) -> &Int {
        &self.p
    }

    pub fn valuation(&self, q: &Rat) -> Valuation {
        if q.is_zero() {
            return Valuation::Infinite;
        }
        let (a, _) = int_valuation(q.numer(), &self.p);
        let (b, _) = int_valuation(q.denom(), &self.p);
        Valuation::Finite(a - b)
    }

    /// Unit part of `q` modulo `p^level`.
    pub fn ac_level(&self, q: &Rat, level: u32) -> Result<Int, PadicError> {
        if q.is_zero() {
            return Err(PadicError::ZeroInput);
        }
        let m = num_traits::pow(self.p.clone(), level as usize);
        let (_, a) = int_valuation(q.numer(), &self.p);
        let (_, b) = int_valuation(q.denom(), &self.p);
        let inv = mod_inverse(&b, &m).expect("unit part is invertible");
        Ok(modulo(&(a * inv), &m))
    }

    pub fn is_unit_residue(&self, r: &Int) -> bool {
        !(r % &self.p).is_zero()
    }
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: &Int, m: &Int) -> Option<Int> {
    if m.is_one() {
        return Some(Int::zero());
    }
    let e = a.extended_gcd(m);
    if !e.gcd.abs().is_one() {
        return None;
    }
    Some(modulo(&(e.x * e.gcd.signum()), m))
}
