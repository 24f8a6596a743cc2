//! Random instances shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeMap;

use kzp::num::{int, rat, to_i64, Int, Rat};
use kzp::padic::{BoxCell, Coord, PAdicContext, Weight};
use kzp::presburger::{parse, Atom};
use kzp::ring::{default_lambda_vars, Generator, Presentation};
use kzp::{Formula, LinearTerm};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type R = ChaCha8Rng;

pub fn rng(seed: u64) -> R {
    R::seed_from_u64(seed)
}

pub const PRIMES: [i64; 4] = [2, 3, 5, 7];

pub fn point(pairs: &[(&str, i64)]) -> BTreeMap<String, Int> {
    pairs.iter().map(|(v, x)| (v.to_string(), int(*x))).collect()
}

pub fn presentation(p: i64, params: &[&str], domain: &str) -> Presentation {
    Presentation::zero(
        PAdicContext::new(p).unwrap(),
        params.iter().map(|s| s.to_string()).collect(),
        parse(domain).unwrap(),
    )
}

fn var(v: &str) -> LinearTerm {
    LinearTerm::var(v)
}

fn shift(r: &mut R, params: &[String]) -> LinearTerm {
    let mut t = LinearTerm::constant(r.gen_range(-1..=2));
    if !params.is_empty() && r.gen_bool(0.5) {
        t = t.add(&var(params.choose(r).unwrap()));
    }
    t
}

/// A valuation condition on `vars`, bounded below in every coordinate and,
/// with `upper`, bounded above as well.
pub fn lambda(r: &mut R, vars: &[String], params: &[String], upper: bool) -> Formula {
    let mut parts = Vec::new();
    for v in vars {
        parts.push(Formula::geq(var(v).add_constant(&int(r.gen_range(-1..=1)))));
        if upper {
            let t = shift(r, params);
            parts.push(Formula::geq(t.add_constant(&int(1)).sub(&var(v))));
        }
    }
    for _ in 0..r.gen_range(0..=2) {
        let a = vars.choose(r).unwrap().clone();
        let b = vars.choose(r).unwrap().clone();
        let extra = match r.gen_range(0..6) {
            0 if a != b => Formula::geq(var(&b).sub(&var(&a)).add_constant(&int(r.gen_range(-1..=1)))),
            1 => Formula::divides(r.gen_range(2..=3), var(&a).add_constant(&int(r.gen_range(0..=2)))),
            2 => Formula::not(Formula::divides(2, var(&a).add(&var(&b)))),
            3 => Formula::or([Formula::geq(LinearTerm::constant(2).sub(&var(&a))), Formula::divides(2, var(&a))]),
            4 if !params.is_empty() => Formula::geq(var(&a).sub(&var(&params[0])).add_constant(&int(1))),
            _ => Formula::geq(var(&a).add_constant(&int(-r.gen_range(0..=2)))),
        };
        parts.push(extra);
    }
    Formula::and(parts)
}

pub fn ac_unit(r: &mut R, p: i64, level: u32) -> Int {
    let m = p.pow(level);
    loop {
        let a = r.gen_range(1..m);
        if a % p != 0 {
            return int(a);
        }
    }
}

pub fn coords(r: &mut R, p: i64, n: usize, max_level: u32) -> Vec<Coord> {
    (0..n)
        .map(|_| {
            let level = r.gen_range(1..=max_level);
            Coord::Box { center: rat(r.gen_range(-3..=3), r.gen_range(1..=3)), level, ac: ac_unit(r, p, level) }
        })
        .collect()
}

/// A weight that decreases along every coordinate, or any weight when
/// the fibers are finite.
pub fn weight(r: &mut R, n: usize, params: &[String], finite: bool) -> Option<Weight> {
    if !r.gen_bool(0.5) {
        return None;
    }
    let b = (0..n).map(|_| if finite { int(r.gen_range(-2..=2)) } else { int(-r.gen_range(1..=3)) }).collect();
    let mut c = LinearTerm::constant(r.gen_range(-2..=2));
    if !params.is_empty() && r.gen_bool(0.4) {
        c = c.add(&LinearTerm::monomial(params.choose(r).unwrap(), int(r.gen_range(-1..=1))));
    }
    Some(Weight { r: int(1), c, b })
}

pub fn cell(r: &mut R, p: i64, n: usize, params: &[String], finite: bool) -> BoxCell {
    let vars = default_lambda_vars(n);
    let lambda = lambda(r, &vars, params, finite);
    let weight = weight(r, n, params, finite);
    BoxCell { coords: coords(r, p, n, 2), lambda_vars: vars, lambda, weight }
}

pub fn coeff(r: &mut R) -> Rat {
    let n = *[-4, -3, -2, -1, 1, 2, 3, 4].choose(r).unwrap();
    rat(n, r.gen_range(1..=3))
}

/// A presentation with convergent generators over the context of `base`.
pub fn random_presentation(r: &mut R, base: &Presentation, max_gens: usize, max_dims: usize) -> Presentation {
    let p = to_i64(base.p()).unwrap();
    let gens = (0..r.gen_range(1..=max_gens))
        .map(|_| {
            let n = r.gen_range(1..=max_dims);
            let finite = r.gen_bool(0.3);
            Generator { coeff: coeff(r), cell: cell(r, p, n, &base.param_vars, finite) }
        })
        .collect();
    base.with_generators(gens)
}

pub fn random_atom(r: &mut R, vars: &[String]) -> Atom {
    let mut t = LinearTerm::constant(r.gen_range(-5..=5));
    for v in vars {
        if r.gen_bool(0.5) {
            t = t.add(&LinearTerm::monomial(v, int(r.gen_range(-5..=5))));
        }
    }
    match r.gen_range(0..5) {
        0 | 1 => Atom::Geq(t),
        2 => Atom::Eq(t),
        _ => Atom::Div(int(r.gen_range(2..=4)), t),
    }
}

fn qf(r: &mut R, vars: &[String], depth: u32) -> Formula {
    if depth == 0 || r.gen_bool(0.35) {
        return Formula::Atom(random_atom(r, vars));
    }
    let parts: Vec<Formula> = (0..r.gen_range(2..=3)).map(|_| qf(r, vars, depth - 1)).collect();
    match r.gen_range(0..5) {
        0 | 1 => Formula::and(parts),
        2 | 3 => Formula::or(parts),
        _ => Formula::not(Formula::and(parts)),
    }
}

/// A formula with `q` nested quantifiers over the free variables `a, b, c`
/// (first `k` of them).
pub fn random_formula(r: &mut R, k: usize, q: usize) -> Formula {
    let free: Vec<String> = ["a", "b", "c"][..k].iter().map(|s| s.to_string()).collect();
    let bound: Vec<String> = ["x", "y", "z"][..q].iter().map(|s| s.to_string()).collect();
    let mut scope = free.clone();
    scope.extend(bound.iter().cloned());
    let mut f = qf(r, &scope, 2);
    for (i, v) in bound.iter().enumerate().rev() {
        f = if r.gen_bool(0.6) { Formula::exists(v, f) } else { Formula::forall(v, f) };
        let outer = &scope[..k + i];
        if !outer.is_empty() && r.gen_bool(0.3) {
            f = Formula::and([f, qf(r, outer, 1)]);
        }
    }
    f
}
