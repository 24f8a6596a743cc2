//! Variable elimination over conjunctions of atoms.
//!
//! The same machinery does three jobs: projecting a variable away
//! (satisfiability), summing `poly * p^exp` over the integer points of a
//! variable's range (closed-form measures and counting), and splitting a
//! variable's range into intervals with exact integer endpoints.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linear::{LinearTerm, QAffine};
use crate::num::{lcm, pow_rat, rat_int, Int, Rat};
use crate::poly::{compose_univariate, difference_antiderivative, Poly};
use crate::presburger::{Atom, Normal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElimError {
    #[error("sum over `{0}` does not converge")]
    Diverges(String),
}

/// `poly * p^exp`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Summand {
    pub poly: Poly,
    pub exp: QAffine,
}

impl Summand {
    pub fn new(poly: Poly, exp: QAffine) -> Self {
        Summand { poly, exp }
    }

    /// Moves the integer part of the exponent's constant into the polynomial.
    pub fn fold_constant(self, p: &Int) -> Summand {
        let c = self.exp.constant_part().clone();
        let k = c.floor().to_integer();
        if k.is_zero() {
            return self;
        }
        let exp = self.exp.add_constant(&-rat_int(&k));
        Summand { poly: self.poly.scale(&pow_rat(p, &k)), exp }
    }

    fn mentions(&self, x: &str) -> bool {
        self.poly.mentions(x) || !self.exp.coeff(x).is_zero()
    }

    fn substitute(&self, x: &str, by: &QAffine) -> Summand {
        Summand { poly: self.poly.substitute(x, &Poly::from_qaffine(by)), exp: self.exp.substitute(x, by) }
    }
}

/// A conjunction of atoms together with the summands attached to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub atoms: Vec<Atom>,
    pub terms: Vec<Summand>,
}

/// Canonical conjunction: tightened atoms, merged parallel bounds,
/// deterministic order. `None` when the conjunction is trivially false.
pub fn simplify_conj(atoms: impl IntoIterator<Item = Atom>) -> Option<Vec<Atom>> {
    let mut bounds: BTreeMap<LinearTerm, Int> = BTreeMap::new();
    let mut eqs: BTreeMap<LinearTerm, Int> = BTreeMap::new();
    let mut divs: BTreeSet<Atom> = BTreeSet::new();
    for a in atoms {
        match a.normalize() {
            Normal::Const(true) => {}
            Normal::Const(false) => return None,
            Normal::Atom(Atom::Geq(t)) => {
                let c = t.constant_part().clone();
                let l = t.add_constant(&-&c);
                let e = bounds.entry(l).or_insert_with(|| c.clone());
                if c < *e {
                    *e = c;
                }
            }
            Normal::Atom(Atom::Eq(t)) => {
                let c = t.constant_part().clone();
                let l = t.add_constant(&-&c);
                if let Some(old) = eqs.get(&l) {
                    if *old != c {
                        return None;
                    }
                }
                eqs.insert(l, c);
            }
            Normal::Atom(d) => {
                divs.insert(d);
            }
        }
    }
    let mut out: Vec<Atom> = Vec::new();
    let mut used = BTreeSet::new();
    for (l, c) in &bounds {
        if used.contains(l) {
            continue;
        }
        let nl = l.neg();
        if let Some(c2) = bounds.get(&nl) {
            let s = c + c2;
            if s.is_negative() {
                return None;
            }
            if s.is_zero() {
                used.insert(nl);
                let eq = l.add_constant(c);
                match Atom::Eq(eq).normalize() {
                    Normal::Atom(Atom::Eq(t)) => {
                        let c = t.constant_part().clone();
                        let k = t.add_constant(&-&c);
                        if let Some(old) = eqs.get(&k) {
                            if *old != c {
                                return None;
                            }
                        }
                        eqs.insert(k, c);
                    }
                    Normal::Const(false) => return None,
                    _ => {}
                }
                continue;
            }
        }
        out.push(Atom::Geq(l.add_constant(c)));
    }
    let mut res: Vec<Atom> = eqs.into_iter().map(|(l, c)| Atom::Eq(l.add_constant(&c))).collect();
    res.extend(out);
    res.extend(divs);
    Some(res)
}

pub fn atom_vars(atoms: &[Atom]) -> BTreeSet<String> {
    atoms.iter().flat_map(|a| a.term().vars().cloned().collect::<Vec<_>>()).collect()
}

/// Substitutes `x = -t / a` (from `a*x + t = 0`) into an atom, scaling by `|a|`.
fn substitute_solved(atom: &Atom, x: &str, a: &Int, t: &LinearTerm) -> Atom {
    let b = atom.term().coeff(x);
    if b.is_zero() {
        return atom.clone();
    }
    let abs = a.abs();
    let sign = if a.is_negative() { -Int::one() } else { Int::one() };
    let rest = atom.term().without(x);
    let new = t.scale(&(-sign * &b)).add(&rest.scale(&abs));
    match atom {
        Atom::Geq(_) => Atom::Geq(new),
        Atom::Eq(_) => Atom::Eq(new),
        Atom::Div(m, _) => Atom::Div(m * &abs, new),
    }
}

/// `x = -t/a` as a rational affine form.
fn solved_value(a: &Int, t: &LinearTerm) -> QAffine {
    t.to_qaffine().scale(&-Rat::new(Int::one(), a.clone()))
}

/// Modulus `m'` such that substituting `x = m'*x + r` removes `x` from every
/// divisibility atom and makes its exponent coefficients integral.
fn residue_modulus(atoms: &[Atom], terms: &[Summand], x: &str) -> Int {
    let mut m = Int::one();
    for a in atoms {
        if let Atom::Div(md, t) = a {
            let c = t.coeff(x);
            if !c.is_zero() {
                m = lcm(&m, &(md / c.gcd(md)));
            }
        }
    }
    for s in terms {
        m = lcm(&m, s.exp.coeff(x).denom());
    }
    m
}

fn rat_from(a: &Int, b: &Int) -> Rat {
    Rat::new(a.clone(), b.clone())
}

/// Exact integer bound for `a*x + t >= 0` (`lower`) or `-a*x + t >= 0`,
/// after fixing `t mod a = r`: the bound and the residue condition.
fn exact_bound(a: &Int, t: &LinearTerm, r: &Int, lower: bool) -> (QAffine, Option<Atom>) {
    let cond = if a.is_one() { None } else { Some(Atom::Div(a.clone(), t.add_constant(&-r))) };
    let q = if lower {
        // ceil(-t/a) = (r - t)/a
        t.neg().add_constant(r).to_qaffine().scale(&rat_from(&Int::one(), a))
    } else {
        // floor(t/a) = (t - r)/a
        t.add_constant(&-r).to_qaffine().scale(&rat_from(&Int::one(), a))
    };
    (q, cond)
}

/// `q >= 0` for an integer-valued rational affine form.
pub fn qaffine_geq(q: &QAffine) -> Atom {
    Atom::Geq(q.clear_denominators().0)
}

struct Bounds {
    lowers: Vec<(Int, LinearTerm)>,
    uppers: Vec<(Int, LinearTerm)>,
    rest: Vec<Atom>,
}

fn split_bounds(atoms: &[Atom], x: &str) -> Bounds {
    let mut b = Bounds { lowers: Vec::new(), uppers: Vec::new(), rest: Vec::new() };
    for a in atoms {
        let c = a.term().coeff(x);
        if c.is_zero() {
            b.rest.push(a.clone());
            continue;
        }
        match a {
            Atom::Geq(t) => {
                let t0 = t.without(x);
                if c.is_positive() {
                    b.lowers.push((c, t0));
                } else {
                    b.uppers.push((-c, t0));
                }
            }
            _ => unreachable!("equations and congruences on x are removed first"),
        }
    }
    b
}

/// Every choice of residues `t_i mod a_i` for the listed bounds.
fn residue_choices(bs: &[(Int, LinearTerm)], lower: bool) -> Vec<(Vec<QAffine>, Vec<Atom>)> {
    let mut acc: Vec<(Vec<QAffine>, Vec<Atom>)> = vec![(Vec::new(), Vec::new())];
    for (a, t) in bs {
        let mut next = Vec::new();
        let mut r = Int::zero();
        while &r < a {
            let (q, cond) = exact_bound(a, t, &r, lower);
            for (qs, conds) in &acc {
                let mut qs = qs.clone();
                qs.push(q.clone());
                let mut conds = conds.clone();
                conds.extend(cond.clone());
                next.push((qs, conds));
            }
            r += 1;
        }
        acc = next;
    }
    acc
}

/// How `prepare` rewrote the eliminated variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rewrite {
    Keep,
    /// `x` equals the given form in the remaining variables.
    Solved(QAffine),
    /// `x = m*x' + r`, with `x'` reusing the name `x`.
    Stride(Int, Int),
}

/// Removes an equation on `x` or the congruences on `x`.
/// Returns the rewritten pieces, each free of Eq/Div atoms in `x`.
pub fn prepare(piece: &Piece, x: &str) -> Vec<(Piece, Rewrite)> {
    let Some(atoms) = simplify_conj(piece.atoms.iter().cloned()) else {
        return Vec::new();
    };
    if let Some(Atom::Eq(t)) = atoms.iter().find(|a| matches!(a, Atom::Eq(t) if t.mentions(x))) {
        let a = t.coeff(x);
        let rest = t.without(x);
        let mut out: Vec<Atom> = atoms.iter().map(|at| substitute_solved(at, x, &a, &rest)).collect();
        if !a.abs().is_one() {
            out.push(Atom::Div(a.abs(), rest.clone()));
        }
        let value = solved_value(&a, &rest);
        let terms = piece.terms.iter().map(|s| s.substitute(x, &value)).collect();
        return match simplify_conj(out) {
            Some(atoms) => vec![(Piece { atoms, terms }, Rewrite::Solved(value))],
            None => Vec::new(),
        };
    }
    let m = residue_modulus(&atoms, &piece.terms, x);
    if m.is_one() {
        return vec![(Piece { atoms, terms: piece.terms.clone() }, Rewrite::Keep)];
    }
    let mut out = Vec::new();
    let mut r = Int::zero();
    while r < m {
        let by = LinearTerm::monomial(x, m.clone()).add_constant(&r);
        let sub: Vec<Atom> = atoms.iter().map(|a| a.substitute(x, &by)).collect();
        if let Some(sub) = simplify_conj(sub) {
            let q = by.to_qaffine();
            let terms = piece.terms.iter().map(|s| s.substitute(x, &q)).collect();
            // Bounds can merge into an equation once the stride is applied.
            for (pc, inner) in prepare(&Piece { atoms: sub, terms }, x) {
                let rw = match inner {
                    Rewrite::Keep => Rewrite::Stride(m.clone(), r.clone()),
                    Rewrite::Solved(v) => Rewrite::Solved(v.scale(&rat_int(&m)).add_constant(&rat_int(&r))),
                    Rewrite::Stride(m2, r2) => Rewrite::Stride(&m * &m2, &m * &r2 + &r),
                };
                out.push((pc, rw));
            }
        }
        r += 1;
    }
    out
}

/// Conjunctions over the remaining variables whose union is `E x. atoms`.
pub fn project(atoms: &[Atom], x: &str) -> Vec<Vec<Atom>> {
    let piece = Piece { atoms: atoms.to_vec(), terms: Vec::new() };
    let mut out = Vec::new();
    for (pc, _) in prepare(&piece, x) {
        if !pc.atoms.iter().any(|a| a.mentions(x)) {
            out.push(pc.atoms);
            continue;
        }
        let b = split_bounds(&pc.atoms, x);
        if b.lowers.is_empty() || b.uppers.is_empty() {
            out.push(b.rest);
            continue;
        }
        let unit_lowers = b.lowers.iter().all(|(a, _)| a.is_one());
        let unit_uppers = b.uppers.iter().all(|(a, _)| a.is_one());
        if unit_lowers || unit_uppers {
            // Exact shadow: the unit side supplies an integer point.
            let mut res = b.rest.clone();
            for (al, tl) in &b.lowers {
                for (au, tu) in &b.uppers {
                    res.push(Atom::Geq(tl.scale(au).add(&tu.scale(al))));
                }
            }
            out.extend(simplify_conj(res));
            continue;
        }
        let split_lower = b.lowers.len() <= b.uppers.len();
        let side = if split_lower { &b.lowers } else { &b.uppers };
        for (qs, conds) in residue_choices(side, split_lower) {
            let mut res = b.rest.clone();
            res.extend(conds);
            let others = if split_lower { &b.uppers } else { &b.lowers };
            for q in &qs {
                for (a, t) in others {
                    // lower: a*q + t >= 0 for a lower-side bound, i.e. the
                    // opposite bound evaluated at the exact point.
                    let tq = t.to_qaffine();
                    let val = if split_lower { tq.sub(&q.scale(&rat_int(a))) } else { tq.add(&q.scale(&rat_int(a))) };
                    res.push(qaffine_geq(&val));
                }
            }
            out.extend(simplify_conj(res));
        }
    }
    out
}

fn small_box_witness(atoms: &[Atom], vars: &[String]) -> bool {
    if vars.len() > 4 {
        return false;
    }
    let b = 2i64;
    let mut pt = vec![-b; vars.len()];
    loop {
        let env = |v: &str| vars.iter().position(|w| w == v).map(|i| Int::from(pt[i]));
        if atoms.iter().all(|a| a.eval(&env).unwrap_or(false)) {
            return true;
        }
        let mut i = 0;
        loop {
            if i == pt.len() {
                return false;
            }
            if pt[i] < b {
                pt[i] += 1;
                break;
            }
            pt[i] = -b;
            i += 1;
        }
    }
}

/// Whether the conjunction has an integer solution.
pub fn satisfiable(atoms: &[Atom]) -> bool {
    let Some(atoms) = simplify_conj(atoms.iter().cloned()) else {
        return false;
    };
    let vars: Vec<String> = atom_vars(&atoms).into_iter().collect();
    if vars.is_empty() {
        return true;
    }
    if small_box_witness(&atoms, &vars) {
        return true;
    }
    let x = pick_projection_var(&atoms, &vars);
    project(&atoms, &x).iter().any(|c| satisfiable(c))
}

fn pick_projection_var(atoms: &[Atom], vars: &[String]) -> String {
    if let Some(Atom::Eq(t)) = atoms.iter().find(|a| matches!(a, Atom::Eq(_))) {
        return t.vars().next().unwrap().clone();
    }
    let score = |x: &String| {
        let b = split_like(atoms, x);
        (b.0 * b.1, b.2)
    };
    vars.iter().min_by_key(|x| score(x)).unwrap().clone()
}

fn split_like(atoms: &[Atom], x: &str) -> (usize, usize, usize) {
    let (mut lo, mut hi, mut dv) = (0, 0, 0);
    for a in atoms {
        let c = a.term().coeff(x);
        if c.is_zero() {
            continue;
        }
        match a {
            Atom::Geq(_) if c.is_positive() => lo += 1,
            Atom::Geq(_) => hi += 1,
            _ => dv += 1,
        }
    }
    (lo, hi, dv)
}

/// The range of `x` in one case: exact integer endpoints (`None` when
/// unbounded on that side) plus the atoms free of `x` that hold there.
#[derive(Clone, Debug)]
pub struct Interval {
    pub lower: Option<QAffine>,
    pub upper: Option<QAffine>,
    pub atoms: Vec<Atom>,
    pub terms: Vec<Summand>,
}

/// Splits `piece` into cases where `x` ranges over one interval with exact
/// endpoints. The cases are disjoint and nonempty intervals are guaranteed
/// by an explicit `lower <= upper` constraint.
pub fn intervals(piece: &Piece, x: &str) -> Vec<Interval> {
    let mut out = Vec::new();
    for (pc, rw) in prepare(piece, x) {
        if let Rewrite::Solved(v) = rw {
            out.push(Interval { lower: Some(v.clone()), upper: Some(v), atoms: pc.atoms, terms: pc.terms });
            continue;
        }
        let b = split_bounds(&pc.atoms, x);
        for (ls, lconds) in residue_choices(&b.lowers, true) {
            for (us, uconds) in residue_choices(&b.uppers, false) {
                let mut base = b.rest.clone();
                base.extend(lconds.iter().cloned());
                base.extend(uconds.iter().cloned());
                let lower_choices: Vec<Option<usize>> =
                    if ls.is_empty() { vec![None] } else { (0..ls.len()).map(Some).collect() };
                let upper_choices: Vec<Option<usize>> =
                    if us.is_empty() { vec![None] } else { (0..us.len()).map(Some).collect() };
                for li in &lower_choices {
                    for ui in &upper_choices {
                        let mut atoms = base.clone();
                        if let Some(i) = li {
                            for (k, q) in ls.iter().enumerate() {
                                if k == *i {
                                    continue;
                                }
                                let strict = if k < *i { Rat::one() } else { Rat::zero() };
                                atoms.push(qaffine_geq(&ls[*i].sub(q).add_constant(&-strict)));
                            }
                        }
                        if let Some(j) = ui {
                            for (k, q) in us.iter().enumerate() {
                                if k == *j {
                                    continue;
                                }
                                let strict = if k < *j { Rat::one() } else { Rat::zero() };
                                atoms.push(qaffine_geq(&q.sub(&us[*j]).add_constant(&-strict)));
                            }
                        }
                        if let (Some(i), Some(j)) = (li, ui) {
                            atoms.push(qaffine_geq(&us[*j].sub(&ls[*i])));
                        }
                        if let Some(atoms) = simplify_conj(atoms) {
                            out.push(Interval {
                                lower: li.map(|i| ls[i].clone()),
                                upper: ui.map(|j| us[j].clone()),
                                atoms,
                                terms: pc.terms.clone(),
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// `sum_{x in [lower, upper]} term` as summands free of `x`.
fn sum_term(
    term: &Summand,
    x: &str,
    lower: Option<&QAffine>,
    upper: Option<&QAffine>,
    p: &Int,
) -> Option<Vec<Summand>> {
    let beta = term.exp.coeff(x);
    debug_assert!(beta.is_integer());
    let beta = beta.to_integer();
    let rest_exp = term.exp.without(x);
    let coeffs = term.poly.coefficients_in(x);
    let mut out = Vec::new();
    let c = if beta.is_zero() { Rat::one() } else { pow_rat(p, &-&beta) };
    let b = rat_int(&beta);
    for (d, cd) in coeffs.iter().enumerate() {
        if cd.is_zero() {
            continue;
        }
        let h = difference_antiderivative(d, &c);
        let hi = |u: &QAffine| {
            Summand::new(cd.mul(&compose_univariate(&h, &Poly::from_qaffine(u))), rest_exp.add(&u.scale(&b)))
        };
        let lo = |l: &QAffine| {
            let lm1 = l.add_constant(&-Rat::one());
            let s = hi(&lm1);
            Summand::new(s.poly.neg(), s.exp)
        };
        match (lower, upper) {
            (Some(l), Some(u)) => {
                out.push(hi(u));
                out.push(lo(l));
            }
            (Some(l), None) if beta.is_negative() => out.push(lo(l)),
            (None, Some(u)) if beta.is_positive() => out.push(hi(u)),
            _ => return None,
        }
    }
    Some(out.into_iter().map(|s| s.fold_constant(p)).collect())
}

/// Sums the piece's summands over all integer values of `x`.
pub fn sum_out(piece: &Piece, x: &str, p: &Int) -> Result<Vec<Piece>, ElimError> {
    let terms: Vec<Summand> = piece.terms.iter().filter(|s| !s.poly.is_zero()).cloned().collect();
    let piece = Piece { atoms: piece.atoms.clone(), terms };
    let mut out = Vec::new();
    for iv in intervals(&piece, x) {
        let mut terms = Vec::new();
        let mut diverges = false;
        for t in &iv.terms {
            if let (false, Some(lo), Some(hi)) = (t.mentions(x), &iv.lower, &iv.upper) {
                // Constant in x: multiply by the interval length.
                let len = hi.sub(lo);
                let len = Poly::from_qaffine(&len.add_constant(&Rat::one()));
                terms.push(Summand::new(t.poly.mul(&len), t.exp.clone()));
                continue;
            }
            match sum_term(t, x, iv.lower.as_ref(), iv.upper.as_ref(), p) {
                Some(s) => terms.extend(s),
                None => {
                    diverges = true;
                    break;
                }
            }
        }
        if diverges {
            if satisfiable(&iv.atoms) {
                return Err(ElimError::Diverges(x.to_string()));
            }
            continue;
        }
        out.push(Piece { atoms: iv.atoms, terms });
    }
    Ok(out)
}

/// Supremum of an affine form over the solutions of a conjunction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Extremum {
    Empty,
    Unbounded,
    Max(Int),
}

fn sat_with(atoms: &[Atom], extra: Atom) -> bool {
    let mut v = atoms.to_vec();
    v.push(extra);
    satisfiable(&v)
}

/// Maximum of `f` over the solutions of `atoms`, found by exponential and
/// then binary search on satisfiability of `f >= k`.
pub fn max_value(atoms: &[Atom], f: &LinearTerm) -> Extremum {
    if !satisfiable(atoms) {
        return Extremum::Empty;
    }
    let at_least = |k: &Int| sat_with(atoms, Atom::Geq(f.add_constant(&-k)));
    const LIMIT: u32 = 48;
    let (mut lo, mut hi);
    if at_least(&Int::zero()) {
        lo = Int::zero();
        let mut step = Int::one();
        let mut i = 0;
        loop {
            let probe = &lo + &step;
            if !at_least(&probe) {
                hi = probe;
                break;
            }
            lo = probe;
            step *= 2;
            i += 1;
            if i > LIMIT {
                return Extremum::Unbounded;
            }
        }
    } else {
        hi = Int::zero();
        let mut step = Int::one();
        loop {
            let probe = &hi - &step;
            if at_least(&probe) {
                lo = probe;
                break;
            }
            hi = probe;
            step *= 2;
        }
    }
    // Invariant: f >= lo satisfiable, f >= hi not.
    while &hi - &lo > Int::one() {
        let mid: Int = (&lo + &hi).div_floor(&Int::from(2));
        if at_least(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Extremum::Max(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};
    use crate::presburger::{parse, Formula};

    fn conj(text: &str) -> Vec<Atom> {
        parse(text).unwrap().atoms().into_iter().cloned().collect()
    }

    fn count_piece(atoms: Vec<Atom>) -> Piece {
        Piece { atoms, terms: vec![Summand::new(Poly::one(), QAffine::zero())] }
    }

    fn eval_pieces(pieces: &[Piece], env: &dyn Fn(&str) -> Option<Int>, p: &Int) -> Rat {
        let mut acc = Rat::zero();
        for pc in pieces {
            if pc.atoms.iter().all(|a| a.eval(env).unwrap()) {
                for t in &pc.terms {
                    let e = t.exp.eval(env).unwrap();
                    assert!(e.is_integer());
                    acc += t.poly.eval_int(env).unwrap() * pow_rat(p, &e.to_integer());
                }
            }
        }
        acc
    }

    #[test]
    fn merges_parallel_bounds() {
        let a = simplify_conj(conj("x >= 2 /\\ x >= 3 /\\ x <= 3")).unwrap();
        assert_eq!(a, conj("x - 3 = 0"));
        assert!(simplify_conj(conj("x >= 4 /\\ x <= 3")).is_none());
    }

    #[test]
    fn satisfiability() {
        assert!(satisfiable(&conj("2*x + 3*y = 17 /\\ x >= 10 /\\ y >= -10")));
        assert!(!satisfiable(&conj("2*x = 6*y + 1")));
        assert!(!satisfiable(&conj("3*x >= 1 /\\ 3*x <= 2")));
        assert!(!satisfiable(&conj("3*x >= 100 /\\ 3*x <= 102 /\\ 5 | x - 3")));
        assert!(satisfiable(&conj("3*x >= 100 /\\ 3*x <= 300 /\\ 5 | x - 4 /\\ 7 | x")));
    }

    #[test]
    fn counts_strided_interval() {
        let p = int(2);
        let pieces = sum_out(&count_piece(conj("l >= 0 /\\ l < s /\\ 2 | l")), "l", &p).unwrap();
        for s in 0..30i64 {
            let env = |v: &str| if v == "s" { Some(int(s)) } else { None };
            assert_eq!(eval_pieces(&pieces, &env, &p), rat((s + 1) / 2, 1), "s={s}");
        }
    }

    #[test]
    fn geometric_tail() {
        let p = int(3);
        let piece = Piece {
            atoms: conj("l >= s"),
            terms: vec![Summand::new(Poly::one(), QAffine::var("l").scale(&rat(-1, 1)))],
        };
        let pieces = sum_out(&piece, "l", &p).unwrap();
        for s in -3..4i64 {
            let env = |v: &str| if v == "s" { Some(int(s)) } else { None };
            // sum_{l >= s} 3^-l = 3^-s * 3/2
            let want = pow_rat(&p, &int(-s)) * rat(3, 2);
            assert_eq!(eval_pieces(&pieces, &env, &p), want);
        }
    }

    #[test]
    fn maxima() {
        let atoms = conj("x >= 0 /\\ y >= 0 /\\ 2*x + 3*y <= 17");
        assert_eq!(max_value(&atoms, &LinearTerm::var("y")), Extremum::Max(int(5)));
        assert_eq!(max_value(&atoms, &LinearTerm::monomial("x", -1)), Extremum::Max(int(0)));
        assert_eq!(max_value(&conj("x >= 3"), &LinearTerm::var("x")), Extremum::Unbounded);
        assert_eq!(max_value(&conj("x >= 3 /\\ x <= 2"), &LinearTerm::var("x")), Extremum::Empty);
    }

    #[test]
    fn divergent_and_vacuous() {
        let p = int(2);
        assert!(sum_out(&count_piece(conj("l >= 0")), "l", &p).is_err());
        let vacuous = count_piece(conj("l >= 0 /\\ s >= 1 /\\ s <= 0"));
        assert_eq!(sum_out(&vacuous, "l", &p).unwrap(), Vec::new());
    }

    #[test]
    fn rational_exponent_forces_residues() {
        // sum over 0 <= l <= 9, 2 | l of 2^(l/2) = 1 + 2 + 4 + 8 + 16
        let p = int(2);
        let piece = Piece {
            atoms: conj("l >= 0 /\\ l <= 9 /\\ 2 | l"),
            terms: vec![Summand::new(Poly::one(), QAffine::var("l").scale(&rat(1, 2)))],
        };
        let pieces = sum_out(&piece, "l", &p).unwrap();
        assert_eq!(eval_pieces(&pieces, &|_| None, &p), rat(31, 1));
    }

    #[test]
    fn projection_matches_brute_force() {
        let f = parse("2*x - y >= 0 /\\ 3*x - z <= 0 /\\ 4 | x + y").unwrap();
        let atoms: Vec<Atom> = f.atoms().into_iter().cloned().collect();
        let cases = project(&atoms, "x");
        for y in -8..8i64 {
            for z in -8..8i64 {
                let want = (-40..40i64).any(|x| {
                    let env = |v: &str| match v {
                        "x" => Some(int(x)),
                        "y" => Some(int(y)),
                        _ => Some(int(z)),
                    };
                    atoms.iter().all(|a| a.eval(&env).unwrap())
                });
                let env = |v: &str| if v == "y" { Some(int(y)) } else { Some(int(z)) };
                let got = cases.iter().any(|c| c.iter().all(|a| a.eval(&env).unwrap()));
                assert_eq!(want, got, "y={y} z={z}");
            }
        }
        let _ = Formula::True;
    }
}
