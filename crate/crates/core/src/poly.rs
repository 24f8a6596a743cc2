//! Multivariate polynomials with rational coefficients.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::linear::QAffine;
use crate::num::{format_rat, Int, Rat};

/// Exponents keyed by variable name; zero exponents are never stored.
pub type Monomial = BTreeMap<String, u32>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::new(), c);
        p
    }

    pub fn var(name: &str) -> Self {
        let mut m = Monomial::new();
        m.insert(name.to_string(), 1);
        let mut p = Self::zero();
        p.add_term(m, Rat::one());
        p
    }

    pub fn from_qaffine(a: &QAffine) -> Self {
        let mut p = Self::constant(a.constant_part().clone());
        for (v, c) in a.coeffs() {
            p = p.add(&Self::var(v).scale(c));
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rat> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => self.terms.get(&Monomial::new()).cloned(),
            _ => None,
        }
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out: Vec<String> = self.terms.keys().flat_map(|m| m.keys().cloned()).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn mentions(&self, v: &str) -> bool {
        self.terms.keys().any(|m| m.contains_key(v))
    }

    pub fn degree_in(&self, v: &str) -> u32 {
        self.terms.keys().map(|m| m.get(v).copied().unwrap_or(0)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.values().sum()).max().unwrap_or(0)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-Rat::one())
    }

    pub fn scale(&self, k: &Rat) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut r = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let mut m = m1.clone();
                for (v, e) in m2 {
                    *m.entry(v.clone()).or_insert(0) += e;
                }
                r.add_term(m, c1 * c2);
            }
        }
        r
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut r = Poly::one();
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// Coefficients of `v^0, v^1, ...` as polynomials in the other variables.
    pub fn coefficients_in(&self, v: &str) -> Vec<Poly> {
        let mut out = vec![Poly::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let d = rest.remove(v).unwrap_or(0);
            out[d as usize].add_term(rest, c.clone());
        }
        out
    }

    pub fn substitute(&self, v: &str, by: &Poly) -> Poly {
        if !self.mentions(v) {
            return self.clone();
        }
        let mut r = Poly::zero();
        for (d, c) in self.coefficients_in(v).iter().enumerate() {
            if !c.is_zero() {
                r = r.add(&c.mul(&by.pow(d as u32)));
            }
        }
        r
    }

    pub fn rename(&self, map: &std::collections::HashMap<String, String>) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            let mut nm = Monomial::new();
            for (v, e) in m {
                *nm.entry(map.get(v).unwrap_or(v).clone()).or_insert(0) += e;
            }
            r.add_term(nm, c.clone());
        }
        r
    }

    pub fn eval(&self, assignment: &dyn Fn(&str) -> Option<Rat>) -> Result<Rat, String> {
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m {
                let x = assignment(v).ok_or_else(|| v.clone())?;
                t *= num_traits::pow(x, *e as usize);
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn eval_int(&self, assignment: &dyn Fn(&str) -> Option<Int>) -> Result<Rat, String> {
        self.eval(&|v| assignment(v).map(Rat::from_integer))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut order: Vec<(&Monomial, &Rat)> = self.terms.iter().collect();
        order.sort_by(|a, b| {
            let da: u32 = a.0.values().sum();
            let db: u32 = b.0.values().sum();
            db.cmp(&da).then_with(|| a.0.cmp(b.0))
        });
        for (i, (m, c)) in order.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let vars: Vec<String> =
                m.iter().map(|(v, e)| if *e == 1 { v.clone() } else { format!("{v}^{e}") }).collect();
            if vars.is_empty() {
                write!(f, "{}", format_rat(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rat(&mag), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

fn binomial(n: usize, k: usize) -> Int {
    let mut r = Int::one();
    for i in 0..k {
        r = r * Int::from(n - i) / Int::from(i + 1);
    }
    r
}

/// Coefficients `h_0..` of the polynomial `H` with `H(n) - c*H(n-1) = n^d`.
///
/// For `c = 1` this is the power sum `1^d + ... + n^d` (degree `d+1`,
/// `H(0) = 0`); otherwise `H` has degree `d`. Summing `x^d q^x` over
/// `L <= x <= U` then gives `H(U) q^U - H(L-1) q^(L-1)` with `c = 1/q`.
pub fn difference_antiderivative(d: usize, c: &Rat) -> Vec<Rat> {
    let sign = |e: usize| if e.is_multiple_of(2) { Rat::one() } else { -Rat::one() };
    if c.is_one() {
        let mut h = vec![Rat::zero(); d + 2];
        // Coefficient of n^k in H(n) - H(n-1) is sum_{j>k} h_j C(j,k) (-1)^(j-k+1).
        for k in (0..=d).rev() {
            let mut rhs = if k == d { Rat::one() } else { Rat::zero() };
            for (j, hj) in h.iter().enumerate().skip(k + 2) {
                rhs -= hj * Rat::from_integer(binomial(j, k)) * sign(j - k + 1);
            }
            h[k + 1] = rhs / Rat::from_integer(Int::from(k + 1));
        }
        h
    } else {
        let mut h = vec![Rat::zero(); d + 1];
        let denom = Rat::one() - c;
        for k in (0..=d).rev() {
            let mut rhs = if k == d { Rat::one() } else { Rat::zero() };
            for (j, hj) in h.iter().enumerate().skip(k + 1) {
                rhs += c * hj * Rat::from_integer(binomial(j, k)) * sign(j - k);
            }
            h[k] = rhs / &denom;
        }
        h
    }
}

/// `sum_k h_k * arg^k`.
pub fn compose_univariate(h: &[Rat], arg: &Poly) -> Poly {
    let mut r = Poly::zero();
    let mut power = Poly::one();
    for c in h {
        r = r.add(&power.scale(c));
        power = power.mul(arg);
    }
    r
}
