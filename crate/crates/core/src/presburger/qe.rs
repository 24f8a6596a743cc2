//! Cooper-style quantifier elimination on negation normal forms.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use super::{Atom, Formula, Normal};
use crate::linear::LinearTerm;
use crate::num::{lcm, Int};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Lit {
    Geq(LinearTerm),
    Eq(LinearTerm),
    Ne(LinearTerm),
    Div(Int, LinearTerm),
    NDiv(Int, LinearTerm),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Nnf {
    T,
    F,
    Lit(Lit),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

impl Lit {
    fn term(&self) -> &LinearTerm {
        match self {
            Lit::Geq(t) | Lit::Eq(t) | Lit::Ne(t) | Lit::Div(_, t) | Lit::NDiv(_, t) => t,
        }
    }

    fn map(&self, f: impl FnOnce(&LinearTerm) -> LinearTerm) -> Lit {
        match self {
            Lit::Geq(t) => Lit::Geq(f(t)),
            Lit::Eq(t) => Lit::Eq(f(t)),
            Lit::Ne(t) => Lit::Ne(f(t)),
            Lit::Div(m, t) => Lit::Div(m.clone(), f(t)),
            Lit::NDiv(m, t) => Lit::NDiv(m.clone(), f(t)),
        }
    }

    fn negate(&self) -> Lit {
        match self {
            Lit::Geq(t) => Lit::Geq(t.neg().add_constant(&-Int::one())),
            Lit::Eq(t) => Lit::Ne(t.clone()),
            Lit::Ne(t) => Lit::Eq(t.clone()),
            Lit::Div(m, t) => Lit::NDiv(m.clone(), t.clone()),
            Lit::NDiv(m, t) => Lit::Div(m.clone(), t.clone()),
        }
    }
}

fn from_normal(n: Normal, positive: bool) -> Nnf {
    match n {
        Normal::Const(b) => {
            if b == positive {
                Nnf::T
            } else {
                Nnf::F
            }
        }
        Normal::Atom(a) => Nnf::Lit(match (a, positive) {
            (Atom::Geq(t), true) => Lit::Geq(t),
            (Atom::Geq(t), false) => Lit::Geq(t.neg().add_constant(&-Int::one())),
            (Atom::Eq(t), true) => Lit::Eq(t),
            (Atom::Eq(t), false) => Lit::Ne(t),
            (Atom::Div(m, t), true) => Lit::Div(m, t),
            (Atom::Div(m, t), false) => Lit::NDiv(m, t),
        }),
    }
}

fn lit(l: Lit) -> Nnf {
    match l {
        Lit::Geq(t) => from_normal(Atom::Geq(t).normalize(), true),
        Lit::Eq(t) => from_normal(Atom::Eq(t).normalize(), true),
        Lit::Ne(t) => from_normal(Atom::Eq(t).normalize(), false),
        Lit::Div(m, t) => from_normal(Atom::Div(m, t).normalize(), true),
        Lit::NDiv(m, t) => from_normal(Atom::Div(m, t).normalize(), false),
    }
}

fn split_constant(t: &LinearTerm) -> (LinearTerm, Int) {
    let c = t.constant_part().clone();
    (t.add_constant(&-&c), c)
}

fn and(parts: Vec<Nnf>) -> Nnf {
    combine(parts, true)
}

fn or(parts: Vec<Nnf>) -> Nnf {
    combine(parts, false)
}

/// Flattening constructor shared by conjunction (`conj`) and disjunction.
/// Inequalities over the same linear part are merged, and opposite bounds
/// that contradict (or cover everything) collapse.
fn combine(parts: Vec<Nnf>, conj: bool) -> Nnf {
    let (unit, zero) = if conj { (Nnf::T, Nnf::F) } else { (Nnf::F, Nnf::T) };
    let mut flat = Vec::new();
    let mut stack: Vec<Nnf> = parts.into_iter().rev().collect();
    while let Some(p) = stack.pop() {
        match p {
            Nnf::And(v) if conj => stack.extend(v.into_iter().rev()),
            Nnf::Or(v) if !conj => stack.extend(v.into_iter().rev()),
            p if p == unit => {}
            p if p == zero => return zero,
            p => flat.push(p),
        }
    }
    let mut bounds: BTreeMap<LinearTerm, Int> = BTreeMap::new();
    let mut others: Vec<Nnf> = Vec::new();
    let mut seen: BTreeSet<Nnf> = BTreeSet::new();
    for p in flat {
        if let Nnf::Lit(Lit::Geq(t)) = &p {
            let (l, c) = split_constant(t);
            let e = bounds.entry(l).or_insert_with(|| c.clone());
            if (conj && c < *e) || (!conj && c > *e) {
                *e = c;
            }
            continue;
        }
        if seen.insert(p.clone()) {
            others.push(p);
        }
    }
    for p in &others {
        if let Nnf::Lit(l) = p {
            if !matches!(l, Lit::Geq(_)) && seen.contains(&Nnf::Lit(l.negate())) {
                return zero;
            }
        }
    }
    let mut out = Vec::new();
    let mut used: BTreeSet<LinearTerm> = BTreeSet::new();
    for (l, c) in &bounds {
        if used.contains(l) {
            continue;
        }
        let nl = l.neg();
        if let Some(c2) = bounds.get(&nl) {
            let s = c + c2;
            if conj {
                if s.is_negative() {
                    return zero;
                }
                if s.is_zero() {
                    used.insert(nl);
                    out.push(lit(Lit::Eq(l.add_constant(c))));
                    continue;
                }
            } else if s >= -Int::one() {
                return zero;
            }
        }
        out.push(Nnf::Lit(Lit::Geq(l.add_constant(c))));
    }
    out.extend(others);
    match out.len() {
        0 => unit,
        1 => out.pop().unwrap(),
        _ => {
            if conj {
                Nnf::And(out)
            } else {
                Nnf::Or(out)
            }
        }
    }
}

fn negate(f: &Nnf) -> Nnf {
    match f {
        Nnf::T => Nnf::F,
        Nnf::F => Nnf::T,
        Nnf::Lit(l) => lit(l.negate()),
        Nnf::And(v) => or(v.iter().map(negate).collect()),
        Nnf::Or(v) => and(v.iter().map(negate).collect()),
    }
}

fn mentions(f: &Nnf, x: &str) -> bool {
    match f {
        Nnf::T | Nnf::F => false,
        Nnf::Lit(l) => l.term().mentions(x),
        Nnf::And(v) | Nnf::Or(v) => v.iter().any(|g| mentions(g, x)),
    }
}

fn map_lits(f: &Nnf, g: &mut dyn FnMut(&Lit) -> Nnf) -> Nnf {
    match f {
        Nnf::T => Nnf::T,
        Nnf::F => Nnf::F,
        Nnf::Lit(l) => g(l),
        Nnf::And(v) => and(v.iter().map(|h| map_lits(h, g)).collect()),
        Nnf::Or(v) => or(v.iter().map(|h| map_lits(h, g)).collect()),
    }
}

fn visit_lits<'a>(f: &'a Nnf, g: &mut dyn FnMut(&'a Lit)) {
    match f {
        Nnf::T | Nnf::F => {}
        Nnf::Lit(l) => g(l),
        Nnf::And(v) | Nnf::Or(v) => v.iter().for_each(|h| visit_lits(h, g)),
    }
}

fn substitute(f: &Nnf, x: &str, by: &LinearTerm) -> Nnf {
    map_lits(f, &mut |l| {
        if l.term().mentions(x) {
            lit(l.map(|t| t.substitute(x, by)))
        } else {
            Nnf::Lit(l.clone())
        }
    })
}

fn exists(x: &str, f: Nnf) -> Nnf {
    if !mentions(&f, x) {
        return f;
    }
    match f {
        Nnf::Or(v) => or(v.into_iter().map(|g| exists(x, g)).collect()),
        Nnf::And(v) => {
            let (dep, free): (Vec<Nnf>, Vec<Nnf>) = v.into_iter().partition(|g| mentions(g, x));
            let mut parts = free;
            parts.push(cooper(x, and(dep)));
            and(parts)
        }
        g => cooper(x, g),
    }
}

/// Replaces equations in `x` by pairs of inequalities. Built without the
/// merging constructors, which would fold the pairs back together.
fn expand_equations(f: &Nnf, x: &str) -> Nnf {
    let geq = |t: LinearTerm| Nnf::Lit(Lit::Geq(t));
    match f {
        Nnf::Lit(Lit::Eq(t)) if t.mentions(x) => Nnf::And(vec![geq(t.clone()), geq(t.neg())]),
        Nnf::Lit(Lit::Ne(t)) if t.mentions(x) => {
            Nnf::Or(vec![geq(t.add_constant(&-Int::one())), geq(t.neg().add_constant(&-Int::one()))])
        }
        Nnf::And(v) => Nnf::And(v.iter().map(|g| expand_equations(g, x)).collect()),
        Nnf::Or(v) => Nnf::Or(v.iter().map(|g| expand_equations(g, x)).collect()),
        other => other.clone(),
    }
}

/// Eliminates `x` from a formula that mentions it.
fn cooper(x: &str, f: Nnf) -> Nnf {
    // Scale so that every occurrence of x has coefficient +-1 (in x' = delta*x).
    let mut delta = Int::one();
    visit_lits(&f, &mut |l| {
        let a = l.term().coeff(x);
        if !a.is_zero() {
            delta = lcm(&delta, &a);
        }
    });
    let xv = LinearTerm::var(x);
    let scaled = map_lits(&f, &mut |l| {
        let a = l.term().coeff(x);
        if a.is_zero() {
            return Nnf::Lit(l.clone());
        }
        let k = &delta / a.abs();
        let unit = if a.is_negative() { xv.neg() } else { xv.clone() };
        let rescale = |t: &LinearTerm| t.without(x).scale(&k).add(&unit);
        lit(match l {
            Lit::Div(m, t) => Lit::Div(m * &k, rescale(t)),
            Lit::NDiv(m, t) => Lit::NDiv(m * &k, rescale(t)),
            other => other.map(rescale),
        })
    });
    let f = and(vec![scaled, lit(Lit::Div(delta, xv.clone()))]);
    if !mentions(&f, x) {
        return f;
    }

    // A top-level equation pins x down.
    let top: Vec<&Nnf> = match &f {
        Nnf::And(v) => v.iter().collect(),
        g => vec![g],
    };
    for g in top {
        if let Nnf::Lit(Lit::Eq(t)) = g {
            let a = t.coeff(x);
            if !a.is_zero() {
                let value = t.without(x).scale(&-a);
                return substitute(&f, x, &value);
            }
        }
    }

    let f = expand_equations(&f, x);

    let mut lowers: BTreeSet<LinearTerm> = BTreeSet::new();
    let mut uppers: BTreeSet<LinearTerm> = BTreeSet::new();
    let mut period = Int::one();
    visit_lits(&f, &mut |l| {
        let a = l.term().coeff(x);
        if a.is_zero() {
            return;
        }
        match l {
            Lit::Geq(t) => {
                if a.is_positive() {
                    lowers.insert(t.without(x).neg());
                } else {
                    uppers.insert(t.without(x));
                }
            }
            Lit::Div(m, _) | Lit::NDiv(m, _) => period = lcm(&period, m),
            _ => unreachable!("equations were expanded"),
        }
    });

    let from_below = lowers.len() <= uppers.len();
    let at_infinity = map_lits(&f, &mut |l| match l {
        Lit::Geq(t) if t.mentions(x) => {
            let lower = t.coeff(x).is_positive();
            if lower == from_below {
                Nnf::F
            } else {
                Nnf::T
            }
        }
        other => Nnf::Lit(other.clone()),
    });
    let mut disjuncts = Vec::new();
    let mut j = Int::one();
    while j <= period {
        let v = if from_below { j.clone() } else { -j.clone() };
        disjuncts.push(substitute(&at_infinity, x, &LinearTerm::constant(v)));
        j += 1;
    }
    let bounds = if from_below { &lowers } else { &uppers };
    for b in bounds {
        let mut j = Int::zero();
        while j < period {
            let shift = if from_below { j.clone() } else { -j.clone() };
            disjuncts.push(substitute(&f, x, &b.add_constant(&shift)));
            j += 1;
        }
    }
    or(disjuncts)
}

fn eliminate(f: &Formula) -> Nnf {
    match f {
        Formula::True => Nnf::T,
        Formula::False => Nnf::F,
        Formula::Atom(a) => from_normal(a.normalize(), true),
        Formula::Not(g) => negate(&eliminate(g)),
        Formula::And(gs) => and(gs.iter().map(eliminate).collect()),
        Formula::Or(gs) => or(gs.iter().map(eliminate).collect()),
        Formula::Exists(x, g) => exists(x, eliminate(g)),
        Formula::Forall(x, g) => negate(&exists(x, negate(&eliminate(g)))),
    }
}

fn to_formula(f: &Nnf) -> Formula {
    match f {
        Nnf::T => Formula::True,
        Nnf::F => Formula::False,
        Nnf::Lit(l) => match l {
            Lit::Geq(t) => Formula::geq(t.clone()),
            Lit::Eq(t) => Formula::eq0(t.clone()),
            Lit::Ne(t) => Formula::not(Formula::eq0(t.clone())),
            Lit::Div(m, t) => Formula::divides(m.clone(), t.clone()),
            Lit::NDiv(m, t) => Formula::not(Formula::divides(m.clone(), t.clone())),
        },
        Nnf::And(v) => Formula::and(v.iter().map(to_formula)),
        Nnf::Or(v) => Formula::or(v.iter().map(to_formula)),
    }
}

/// Quantifier-free formula equivalent to `f` over the integers.
pub fn qe(f: &Formula) -> Formula {
    to_formula(&eliminate(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presburger::{equivalent_on_box, parse};

    #[test]
    fn even_witness() {
        let f = qe(&parse("E x. a = 2*x").unwrap());
        assert_eq!(f, parse("2 | a").unwrap());
    }

    #[test]
    fn interval_nonempty() {
        let f = qe(&parse("E x. x >= 0 /\\ x <= a").unwrap());
        assert_eq!(f, parse("a >= 0").unwrap());
    }

    #[test]
    fn mixed_coefficients_checked_on_box() {
        let f = qe(&parse("E x. 2*x >= a /\\ 3*x <= b").unwrap());
        assert!(f.is_quantifier_free());
        // Reference: exists x in a range wide enough for |a|, |b| <= 15.
        let reference = Formula::or((-20..=20).map(|x| parse(&format!("2*{x} >= a /\\ 3*{x} <= b")).unwrap()));
        assert!(equivalent_on_box(&f, &reference.simplify(), 15).unwrap());
    }

    #[test]
    fn universal_and_negated() {
        let f = qe(&parse("A x. x >= a \\/ x < b").unwrap());
        assert!(equivalent_on_box(&f, &parse("b >= a").unwrap(), 8).unwrap());
        let g = qe(&parse("!(E y. y >= 0 /\\ 3*y = x)").unwrap());
        assert!(equivalent_on_box(&g, &parse("x < 0 \\/ !(3 | x)").unwrap(), 12).unwrap());
    }

    #[test]
    fn nested() {
        let f = qe(&parse("E x. E y. x + y = a /\\ x >= 0 /\\ y >= 0 /\\ 2 | x - y").unwrap());
        assert!(equivalent_on_box(&f, &parse("a >= 0 /\\ 2 | a").unwrap(), 12).unwrap());
    }

    #[test]
    fn closed_sentences() {
        assert_eq!(qe(&parse("A x. E y. x = 2*y \\/ x = 2*y + 1").unwrap()), Formula::True);
        assert_eq!(qe(&parse("E x. 2*x = 1").unwrap()), Formula::False);
    }
}
