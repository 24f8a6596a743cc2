//! Deciding whether an exponential polynomial vanishes on a Presburger set.
//!
//! Along one variable `x`, `Σ_{β,d} F_{β,d} x^d p^{βx}` with `N` distinct
//! pairs `(β, d)` has at most `N - 1` real zeros unless every coefficient
//! vanishes. Intervals with at least `N` points therefore reduce to the
//! coefficients; shorter intervals are unrolled point by point.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{ExpPolynomial, PAdicContext};
use crate::linear::QAffine;
use crate::num::{pow_rat, rat_int, Int, Rat};
use crate::poly::Poly;
use crate::presburger::{evaluate_qf, qe, Atom, Formula};
use crate::semilinear::count::disjoint_refinement;
use crate::semilinear::elim::{intervals, prepare, qaffine_geq, satisfiable, simplify_conj, Rewrite};
use crate::semilinear::{disjoint_dnf, Piece, Summand};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZeroTest {
    Zero,
    /// A parameter point where the value is provably nonzero.
    NonZero(Vec<(String, Int)>),
}

type Point = BTreeMap<String, Int>;

fn value(terms: &[Summand], env: &Point, p: &Int) -> Rat {
    let look = |v: &str| env.get(v).cloned();
    let mut acc = Rat::zero();
    for t in terms {
        let e = t.exp.eval(&look).expect("assigned");
        let c = t.poly.eval_int(&look).expect("assigned");
        acc += c * pow_rat(p, &e.to_integer());
    }
    acc
}

fn merge(terms: &[Summand]) -> Vec<Summand> {
    let mut m: BTreeMap<QAffine, Poly> = BTreeMap::new();
    for t in terms {
        let e = m.entry(t.exp.clone()).or_insert_with(Poly::zero);
        *e = e.add(&t.poly);
    }
    m.into_iter().filter(|(_, p)| !p.is_zero()).map(|(exp, poly)| Summand { poly, exp }).collect()
}

fn eval_q(q: &QAffine, env: &Point) -> Int {
    let v = q.eval(&|n| env.get(n).cloned()).expect("assigned");
    debug_assert!(v.is_integer());
    v.to_integer()
}

/// A point of `atoms` (over `vars`) where the terms do not vanish.
fn nonzero_point(atoms: &[Atom], terms: &[Summand], vars: &[String], p: &Int) -> Option<Point> {
    let terms = merge(terms);
    if terms.is_empty() {
        return None;
    }
    let atoms = simplify_conj(atoms.iter().cloned())?;
    let Some((x, rest)) = vars.split_last() else {
        let v = value(&terms, &Point::new(), p);
        return (!v.is_zero() && atoms.is_empty()).then(Point::new);
    };
    let piece = Piece { atoms, terms };
    for (pc, rw) in prepare(&piece, x) {
        let restore = |xv: Int, w: &Point| -> Int {
            match &rw {
                Rewrite::Keep => xv,
                Rewrite::Stride(m, r) => m * xv + r,
                Rewrite::Solved(v) => eval_q(v, w),
            }
        };
        for iv in intervals(&pc, x) {
            let mut groups: BTreeMap<(Int, usize), Vec<Summand>> = BTreeMap::new();
            for t in &iv.terms {
                let beta = t.exp.coeff(x);
                let rest_exp = t.exp.without(x);
                for (d, c) in t.poly.coefficients_in(x).into_iter().enumerate() {
                    if !c.is_zero() {
                        groups
                            .entry((beta.to_integer(), d))
                            .or_default()
                            .push(Summand { poly: c, exp: rest_exp.clone() });
                    }
                }
            }
            let n = groups.len();
            if n == 0 {
                continue;
            }
            let pick_x = |w: &Point, cands: &mut dyn Iterator<Item = Int>| -> Option<Point> {
                for xv in cands {
                    let mut full = w.clone();
                    full.insert(x.clone(), xv.clone());
                    if !value(&iv.terms, &full, p).is_zero() {
                        let mut out = w.clone();
                        out.insert(x.clone(), restore(xv, w));
                        return Some(out);
                    }
                }
                None
            };
            // Long intervals: every coefficient must vanish.
            let mut long = iv.atoms.clone();
            if let (Some(l), Some(u)) = (&iv.lower, &iv.upper) {
                long.push(qaffine_geq(&u.sub(l).add_constant(&(Rat::one() - rat_int(&Int::from(n))))));
            }
            if satisfiable(&long) {
                for g in groups.values() {
                    if let Some(w) = nonzero_point(&long, g, rest, p) {
                        let found = match (&iv.lower, &iv.upper) {
                            (Some(l), _) => {
                                let base = eval_q(l, &w);
                                pick_x(&w, &mut (0..n).map(|i| &base + Int::from(i)))
                            }
                            (None, Some(u)) => {
                                let base = eval_q(u, &w);
                                pick_x(&w, &mut (0..n).map(|i| &base - Int::from(i)))
                            }
                            (None, None) => pick_x(&w, &mut (0..n).map(Int::from)),
                        };
                        if found.is_some() {
                            return found;
                        }
                    }
                }
            }
            // Short intervals: unroll.
            if let (Some(l), Some(u)) = (&iv.lower, &iv.upper) {
                for j in 0..n.saturating_sub(1) {
                    let mut short = iv.atoms.clone();
                    let (t, _) = u.sub(l).add_constant(&-rat_int(&Int::from(j))).clear_denominators();
                    short.push(Atom::Eq(t));
                    let Some(short) = simplify_conj(short) else { continue };
                    if !satisfiable(&short) {
                        continue;
                    }
                    for i in 0..=j {
                        let at = l.add_constant(&rat_int(&Int::from(i)));
                        let sub: Vec<Summand> = iv
                            .terms
                            .iter()
                            .map(|t| Summand {
                                poly: t.poly.substitute(x, &Poly::from_qaffine(&at)),
                                exp: t.exp.substitute(x, &at),
                            })
                            .collect();
                        if let Some(w) = nonzero_point(&short, &sub, rest, p) {
                            let xv = eval_q(&at, &w);
                            if let Some(found) = pick_x(&w, &mut std::iter::once(xv)) {
                                return Some(found);
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

fn in_domain(domain: &Formula, pt: &Point) -> bool {
    evaluate_qf(domain, pt).unwrap_or(false)
}

fn quick_witness(e: &ExpPolynomial, domain: &Formula, vars: &[String], p: &Int) -> Option<Point> {
    let k = vars.len();
    let radius: i64 = match k {
        0 => 0,
        1 => 24,
        2 => 8,
        3 => 4,
        _ => 2,
    };
    let mut pt = vec![-radius; k];
    loop {
        let l1: i64 = pt.iter().map(|v| v.abs()).sum();
        if l1 <= radius {
            let env: Point = vars.iter().cloned().zip(pt.iter().map(|v| Int::from(*v))).collect();
            if in_domain(domain, &env) {
                let look = |v: &str| env.get(v).cloned();
                if e.eval_or_zero(&look, p).map(|v| !v.is_zero()).unwrap_or(false) {
                    return Some(env);
                }
            }
        }
        let mut i = 0;
        loop {
            if i == k {
                return None;
            }
            if pt[i] < radius {
                pt[i] += 1;
                break;
            }
            pt[i] = -radius;
            i += 1;
        }
    }
}

/// Whether `e` vanishes at every integer point of `param_domain`, where a
/// point outside every guard counts as zero.
pub fn exp_poly_is_zero(e: &ExpPolynomial, param_domain: &Formula, ctx: &PAdicContext) -> ZeroTest {
    let p = ctx.p();
    let e = e.canonical();
    if e.is_empty() {
        return ZeroTest::Zero;
    }
    let domain = qe(param_domain).simplify();
    let mut vars = e.vars();
    for v in domain.free_vars() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    vars.sort();
    let verified = |pt: Point| -> Option<ZeroTest> {
        let look = |v: &str| pt.get(v).cloned();
        let ok = in_domain(&domain, &pt) && e.eval_or_zero(&look, p).map(|v| !v.is_zero()).unwrap_or(false);
        ok.then(|| ZeroTest::NonZero(pt.into_iter().collect()))
    };
    if let Some(pt) = quick_witness(&e, &domain, &vars, p) {
        return verified(pt).expect("quick witnesses are evaluated directly");
    }
    let mut by_guard: BTreeMap<Vec<Atom>, Vec<Summand>> = BTreeMap::new();
    for t in &e.terms {
        by_guard.entry(t.guard.clone()).or_default().push(Summand { poly: t.poly.clone(), exp: t.exp.clone() });
    }
    let guarded: Vec<(Vec<Atom>, Vec<Summand>)> = by_guard.into_iter().collect();
    let regions = disjoint_refinement(disjoint_dnf(&domain), &guarded, Vec::new(), &|a, b| {
        let mut v = a.clone();
        v.extend(b.iter().cloned());
        v
    });
    for (atoms, terms) in regions {
        if let Some(mut pt) = nonzero_point(&atoms, &terms, &vars, p) {
            for v in &vars {
                pt.entry(v.clone()).or_insert_with(Int::zero);
            }
            if let Some(r) = verified(pt) {
                return r;
            }
        }
    }
    ZeroTest::Zero
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};
    use crate::padic::ExpTerm;
    use crate::presburger::parse;

    fn g(text: &str) -> Vec<Atom> {
        parse(text).unwrap().atoms().into_iter().cloned().collect()
    }

    fn term(guard: &str, poly: Poly, exp: QAffine) -> ExpTerm {
        ExpTerm { guard: g(guard), poly, exp }
    }

    fn ctx() -> PAdicContext {
        PAdicContext::new(2).unwrap()
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(exp_poly_is_zero(&ExpPolynomial::zero(), &Formula::True, &ctx()), ZeroTest::Zero);
    }

    #[test]
    fn cancellation() {
        let s = Poly::var("s");
        let e = ExpPolynomial {
            terms: vec![term("s >= 0", s.clone(), QAffine::zero()), term("s >= 0", s.neg(), QAffine::zero())],
        };
        assert_eq!(exp_poly_is_zero(&e, &Formula::True, &ctx()), ZeroTest::Zero);
    }

    #[test]
    fn geometric_difference_is_nonzero() {
        let e = ExpPolynomial {
            terms: vec![
                term("s >= 0", Poly::one(), QAffine::zero()),
                term("s >= 0", Poly::constant(rat(-1, 1)), QAffine::var("s").scale(&rat(-1, 1))),
            ],
        };
        let r = exp_poly_is_zero(&e, &parse("s >= 0").unwrap(), &ctx());
        assert!(matches!(r, ZeroTest::NonZero(ref w) if w[0].1 != int(0)));
    }

    #[test]
    fn identity_across_guards() {
        // s on [0,inf) equals s on [0,9] plus s on [10,inf).
        let s = Poly::var("s");
        let e = ExpPolynomial {
            terms: vec![
                term("s >= 0", s.clone(), QAffine::zero()),
                term("s >= 0 /\\ s <= 9", s.neg(), QAffine::zero()),
                term("s >= 10", s.neg(), QAffine::zero()),
            ],
        };
        assert_eq!(exp_poly_is_zero(&e, &Formula::True, &ctx()), ZeroTest::Zero);
    }

    #[test]
    fn finds_far_away_witness() {
        // Nonzero only for s >= 40 (outside the quick search radius).
        let e = ExpPolynomial { terms: vec![term("s >= 40 /\\ 3 | s", Poly::one(), QAffine::zero())] };
        let r = exp_poly_is_zero(&e, &Formula::True, &ctx());
        let ZeroTest::NonZero(w) = r else { panic!("{r:?}") };
        assert!(w[0].1 >= int(40));
    }

    #[test]
    fn polynomial_identity_on_congruence_class() {
        // (s^2 - s)/2 - (number of pairs) where the pair count is written per parity.
        let s = Poly::var("s");
        let half = s.mul(&s).sub(&s).scale(&rat(1, 2));
        let e = ExpPolynomial {
            terms: vec![
                term("2 | s", half.clone(), QAffine::zero()),
                term("2 | s - 1", half.clone(), QAffine::zero()),
                term("true", half.neg(), QAffine::zero()),
            ],
        };
        assert_eq!(exp_poly_is_zero(&e, &Formula::True, &ctx()), ZeroTest::Zero);
    }
}
