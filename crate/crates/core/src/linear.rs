//! Sparse affine forms over named integer variables.
//!
//! [`LinearTerm`] carries integer coefficients and is what formulas are built
//! from. [`QAffine`] carries rational coefficients; it shows up as summation
//! bounds and exponents, where it is only ever evaluated at points on which
//! it takes integer values.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::num::{lcm, rat_int, Int, Rat};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinearTerm {
    coeffs: BTreeMap<String, Int>,
    constant: Int,
}

impl LinearTerm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<Int>) -> Self {
        LinearTerm { coeffs: BTreeMap::new(), constant: c.into() }
    }

    pub fn var(name: &str) -> Self {
        Self::monomial(name, Int::one())
    }

    pub fn monomial(name: &str, c: impl Into<Int>) -> Self {
        let mut t = Self::zero();
        t.add_coeff(name, &c.into());
        t
    }

    pub fn from_parts<I>(coeffs: I, constant: Int) -> Self
    where
        I: IntoIterator<Item = (String, Int)>,
    {
        let mut t = Self::constant(constant);
        for (v, c) in coeffs {
            t.add_coeff(&v, &c);
        }
        t
    }

    fn add_coeff(&mut self, name: &str, c: &Int) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(name.to_string()).or_insert_with(Int::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(name);
        }
    }

    pub fn coeff(&self, name: &str) -> Int {
        self.coeffs.get(name).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &BTreeMap<String, Int> {
        &self.coeffs
    }

    pub fn constant_part(&self) -> &Int {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.coeffs.keys()
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.coeffs.contains_key(name)
    }

    pub fn mentions_any(&self, names: &BTreeSet<String>) -> bool {
        self.coeffs.keys().any(|v| names.contains(v))
    }

    pub fn add(&self, other: &LinearTerm) -> LinearTerm {
        let mut r = self.clone();
        for (v, c) in &other.coeffs {
            r.add_coeff(v, c);
        }
        r.constant += &other.constant;
        r
    }

    pub fn sub(&self, other: &LinearTerm) -> LinearTerm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LinearTerm {
        self.scale(&-Int::one())
    }

    pub fn scale(&self, k: &Int) -> LinearTerm {
        if k.is_zero() {
            return Self::zero();
        }
        LinearTerm {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn add_constant(&self, c: &Int) -> LinearTerm {
        let mut r = self.clone();
        r.constant += c;
        r
    }

    /// The term with `name` dropped.
    pub fn without(&self, name: &str) -> LinearTerm {
        let mut r = self.clone();
        r.coeffs.remove(name);
        r
    }

    pub fn substitute(&self, name: &str, by: &LinearTerm) -> LinearTerm {
        match self.coeffs.get(name) {
            None => self.clone(),
            Some(c) => self.without(name).add(&by.scale(c)),
        }
    }

    pub fn rename(&self, map: &HashMap<String, String>) -> LinearTerm {
        let mut r = Self::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            let n = map.get(v).unwrap_or(v);
            r.add_coeff(n, c);
        }
        r
    }

    /// Gcd of the variable coefficients (zero for a constant term).
    pub fn content(&self) -> Int {
        self.coeffs.values().fold(Int::zero(), |g, c| num_integer::Integer::gcd(&g, c))
    }

    pub fn eval(&self, assignment: &dyn Fn(&str) -> Option<Int>) -> Result<Int, String> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            let x = assignment(v).ok_or_else(|| v.clone())?;
            acc += c * x;
        }
        Ok(acc)
    }

    pub fn to_qaffine(&self) -> QAffine {
        QAffine::from(self)
    }
}

fn write_signed_terms<C: fmt::Display + Signed + One + PartialEq>(
    f: &mut fmt::Formatter<'_>,
    coeffs: impl Iterator<Item = (String, C)>,
    constant: &C,
) -> fmt::Result {
    let mut first = true;
    for (v, c) in coeffs {
        let neg = c.is_negative();
        let mag = c.abs();
        if first {
            if neg {
                write!(f, "-")?;
            }
        } else if neg {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        if mag.is_one() {
            write!(f, "{v}")?;
        } else {
            write!(f, "{mag}*{v}")?;
        }
        first = false;
    }
    if first {
        write!(f, "{constant}")
    } else if constant.is_zero() {
        Ok(())
    } else if constant.is_negative() {
        write!(f, " - {}", constant.abs())
    } else {
        write!(f, " + {constant}")
    }
}

impl fmt::Display for LinearTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_signed_terms(f, self.coeffs.iter().map(|(v, c)| (v.clone(), c.clone())), &self.constant)
    }
}

/// Affine form with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QAffine {
    coeffs: BTreeMap<String, Rat>,
    constant: Rat,
}

impl Default for QAffine {
    fn default() -> Self {
        QAffine { coeffs: BTreeMap::new(), constant: Rat::zero() }
    }
}

impl From<&LinearTerm> for QAffine {
    fn from(t: &LinearTerm) -> Self {
        QAffine {
            coeffs: t.coeffs.iter().map(|(v, c)| (v.clone(), rat_int(c))).collect(),
            constant: rat_int(&t.constant),
        }
    }
}

impl QAffine {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rat) -> Self {
        QAffine { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(name: &str) -> Self {
        let mut q = Self::zero();
        q.add_coeff(name, &Rat::one());
        q
    }

    fn add_coeff(&mut self, name: &str, c: &Rat) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(name.to_string()).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(name);
        }
    }

    pub fn coeff(&self, name: &str) -> Rat {
        self.coeffs.get(name).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &BTreeMap<String, Rat> {
        &self.coeffs
    }

    pub fn constant_part(&self) -> &Rat {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.coeffs.keys()
    }

    pub fn add(&self, o: &QAffine) -> QAffine {
        let mut r = self.clone();
        for (v, c) in &o.coeffs {
            r.add_coeff(v, c);
        }
        r.constant += &o.constant;
        r
    }

    pub fn sub(&self, o: &QAffine) -> QAffine {
        self.add(&o.scale(&-Rat::one()))
    }

    pub fn scale(&self, k: &Rat) -> QAffine {
        if k.is_zero() {
            return Self::zero();
        }
        QAffine { coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(), constant: &self.constant * k }
    }

    pub fn add_constant(&self, c: &Rat) -> QAffine {
        let mut r = self.clone();
        r.constant += c;
        r
    }

    pub fn without(&self, name: &str) -> QAffine {
        let mut r = self.clone();
        r.coeffs.remove(name);
        r
    }

    pub fn substitute(&self, name: &str, by: &QAffine) -> QAffine {
        match self.coeffs.get(name) {
            None => self.clone(),
            Some(c) => self.without(name).add(&by.scale(c)),
        }
    }

    /// Lcm of all denominators, coefficients and constant.
    pub fn denominator(&self) -> Int {
        self.coeffs.values().chain(std::iter::once(&self.constant)).fold(Int::one(), |d, c| lcm(&d, c.denom()))
    }

    /// `(t, d)` with `d > 0` and `self = t / d`.
    pub fn clear_denominators(&self) -> (LinearTerm, Int) {
        let d = self.denominator();
        let dq = rat_int(&d);
        let t = LinearTerm::from_parts(
            self.coeffs.iter().map(|(v, c)| (v.clone(), (c * &dq).to_integer())),
            (&self.constant * &dq).to_integer(),
        );
        (t, d)
    }

    pub fn eval(&self, assignment: &dyn Fn(&str) -> Option<Int>) -> Result<Rat, String> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            let x = assignment(v).ok_or_else(|| v.clone())?;
            acc += c * rat_int(&x);
        }
        Ok(acc)
    }

    pub fn eval_rat(&self, assignment: &dyn Fn(&str) -> Option<Rat>) -> Result<Rat, String> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            let x = assignment(v).ok_or_else(|| v.clone())?;
            acc += c * x;
        }
        Ok(acc)
    }
}

impl fmt::Display for QAffine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_signed_terms(f, self.coeffs.iter().map(|(v, c)| (v.clone(), c.clone())), &self.constant)
    }
}
