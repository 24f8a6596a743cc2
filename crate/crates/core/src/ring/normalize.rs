//! Normalization to basic form.
//!
//! After a setup phase that brings every cell to weighted level-one form
//! centred at zero, the last valuation variable `x` with a nonzero weight
//! coefficient is removed from one generator at a time: congruences and
//! equations on `x` are absorbed by a reparametrization, the range of `x`
//! is cut into intervals, each interval becomes a difference of tails,
//! tails are sheared onto `ℕ`, and the geometric sum over `ℕ` is replaced
//! by its value `p^n/(p^n - 1)`.

use num_traits::{One, Signed, Zero};

use crate::linear::QAffine;
use crate::num::{lcm, pow_rat, rat_int, Int, Rat};
use crate::padic::{BoxCell, Coord, Weight};
use crate::poly::Poly;
use crate::presburger::{qe, Atom, Formula};
use crate::semilinear::elim::{intervals, prepare, qaffine_geq, satisfiable, Rewrite};
use crate::semilinear::{
    count_parametric, disjoint_dnf, simplify_conj, to_cells, CountError, Piece, PiecewisePolynomial, Summand,
};

use super::measure::measure_function;
use super::presentation::explicit_weight;
use super::{Certificate, Generator, Presentation, RingError, Rule, Step};

/// A presentation whose generators all have finite fibers and weights
/// free of valuation variables, with the fiber counts that certify it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicPresentation {
    pub presentation: Presentation,
    pub counts: Vec<PiecewisePolynomial>,
}

impl BasicPresentation {
    /// Recomputes the fiber counts and checks the weights.
    pub fn certify(xi: &Presentation) -> Result<BasicPresentation, RingError> {
        let domain = qe(&xi.param_domain);
        let mut counts = Vec::new();
        for (i, g) in xi.generators.iter().enumerate() {
            let c = &g.cell;
            if c.is_degenerate() {
                return Err(RingError::Input(format!("generator {i} has a degenerate coordinate")));
            }
            match &c.weight {
                Some(w) if !w.depends_on_lambda() => {}
                _ => return Err(RingError::Input(format!("generator {i}: weight depends on valuations"))),
            }
            let cells = to_cells(&qe(&c.lambda), &c.lambda_vars, &xi.param_vars);
            match count_parametric(&cells, &domain) {
                Ok(pp) => counts.push(pp),
                Err(CountError::InfiniteFiber(var)) => return Err(RingError::Diverges { generator: i, var }),
            }
        }
        Ok(BasicPresentation { presentation: xi.clone(), counts })
    }
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub ell: Int,
    pub basic: BasicPresentation,
    pub certificate: Certificate,
}

/// Weighted level-one generator on unit coordinates centred at zero.
#[derive(Clone, Debug)]
struct Gen {
    coeff: Rat,
    atoms: Vec<Atom>,
    vars: Vec<String>,
    exp: QAffine,
    origin: usize,
}

impl Gen {
    fn to_generator(&self) -> Generator {
        let (t, r) = self.exp.clear_denominators();
        let b = self.vars.iter().map(|v| t.coeff(v)).collect();
        let c = self.vars.iter().fold(t.clone(), |c, v| c.without(v));
        Generator {
            coeff: self.coeff.clone(),
            cell: BoxCell {
                coords: self.vars.iter().map(|_| Coord::unit(Rat::zero())).collect(),
                lambda_vars: self.vars.clone(),
                lambda: Formula::conj_atoms(self.atoms.iter().cloned()),
                weight: Some(Weight { r, c, b }),
            },
        }
    }

    fn with(&self, coeff: Rat, atoms: Vec<Atom>, exp: QAffine) -> Option<Gen> {
        Some(Gen { coeff, atoms: simplify_conj(atoms)?, vars: self.vars.clone(), exp, origin: self.origin })
    }

    fn pick(&self) -> Option<String> {
        self.vars.iter().rev().find(|v| !self.exp.coeff(v).is_zero()).cloned()
    }
}

struct Trace<'a> {
    base: &'a Presentation,
    cur: Vec<Gen>,
    steps: Vec<Step>,
}

impl Trace<'_> {
    fn snapshot(&self) -> Presentation {
        self.base.with_generators(self.cur.iter().map(Gen::to_generator).collect())
    }

    /// Replaces `cur[at..at + len]` by `by`, recording the step.
    fn replace(&mut self, at: usize, len: usize, by: Vec<Gen>, rule: Rule, note: String) {
        let before = self.snapshot();
        self.cur.splice(at..at + len, by);
        let after = self.snapshot();
        if before != after {
            self.steps.push(Step { rule, before, after, note });
        }
    }
}

/// A generator on one interval, its guard and signed tails.
type Case = (Gen, Vec<Atom>, Vec<(Rat, Tail)>);

fn atom_x_geq(x: &str, b: &QAffine) -> Atom {
    qaffine_geq(&QAffine::var(x).sub(b))
}

fn atom_x_leq(x: &str, b: &QAffine) -> Atom {
    qaffine_geq(&b.sub(&QAffine::var(x)))
}

#[derive(Clone)]
enum Tail {
    /// `x >= bound`
    Up(QAffine),
    /// `x <= bound`
    Down(QAffine),
}

fn one_round(tr: &mut Trace<'_>, i: usize, x: &str) -> Result<(), RingError> {
    let g = tr.cur[i].clone();
    let piece = Piece { atoms: g.atoms.clone(), terms: vec![Summand::new(Poly::one(), g.exp.clone())] };
    let prepared = prepare(&piece, x);
    let untouched = prepared.len() == 1 && prepared[0].1 == Rewrite::Keep && prepared[0].0.atoms == g.atoms;
    if !untouched {
        let mut notes = Vec::new();
        let mut out = Vec::new();
        for (pc, rw) in prepared {
            let mut n = g.clone();
            n.atoms = pc.atoms;
            n.exp = pc.terms[0].exp.clone();
            match &rw {
                Rewrite::Solved(v) => {
                    n.vars.retain(|v| v != x);
                    notes.push(format!("{x} = {v}"));
                }
                Rewrite::Stride(m, r) => notes.push(format!("{x} -> {m}*{x} + {r}")),
                Rewrite::Keep => {}
            }
            out.push(n);
        }
        notes.dedup();
        tr.replace(i, 1, out, Rule::P_reparam, notes.join("; "));
        return Ok(());
    }
    let beta = g.exp.coeff(x);
    debug_assert!(beta.is_integer());
    let mut cases: Vec<Case> = Vec::new();
    for iv in intervals(&piece, x) {
        let tails = match (&iv.lower, &iv.upper) {
            (Some(l), Some(u)) if beta.is_negative() => {
                vec![(Rat::one(), Tail::Up(l.clone())), (-Rat::one(), Tail::Up(u.add_constant(&Rat::one())))]
            }
            (Some(l), Some(u)) => {
                vec![(Rat::one(), Tail::Down(u.clone())), (-Rat::one(), Tail::Down(l.add_constant(&-Rat::one())))]
            }
            (Some(l), None) if beta.is_negative() => vec![(Rat::one(), Tail::Up(l.clone()))],
            (None, Some(u)) if beta.is_positive() => vec![(Rat::one(), Tail::Down(u.clone()))],
            _ => {
                if satisfiable(&iv.atoms) {
                    return Err(RingError::Diverges { generator: g.origin, var: x.to_string() });
                }
                continue;
            }
        };
        let mut atoms = iv.atoms.clone();
        atoms.extend(iv.lower.iter().map(|l| atom_x_geq(x, l)));
        atoms.extend(iv.upper.iter().map(|u| atom_x_leq(x, u)));
        if let Some(n) = g.with(g.coeff.clone(), atoms, g.exp.clone()) {
            cases.push((n, iv.atoms, tails));
        }
    }
    let k = cases.len();
    tr.replace(i, 1, cases.iter().map(|c| c.0.clone()).collect(), Rule::CellSplit, format!("range of {x}"));

    let mut tails = Vec::new();
    for (_, rest, ts) in &cases {
        for (sign, t) in ts {
            let mut atoms = rest.clone();
            atoms.push(match t {
                Tail::Up(b) => atom_x_geq(x, b),
                Tail::Down(b) => atom_x_leq(x, b),
            });
            if let Some(n) = g.with(&g.coeff * sign, atoms, g.exp.clone()) {
                tails.push((n, rest.clone(), t.clone()));
            }
        }
    }
    let k2 = tails.len();
    tr.replace(i, k, tails.iter().map(|t| t.0.clone()).collect(), Rule::CellSplit, format!("tails in {x}"));

    let mut sheared = Vec::new();
    for (n, rest, t) in &tails {
        let by = match t {
            Tail::Up(b) => b.add(&QAffine::var(x)),
            Tail::Down(b) => b.sub(&QAffine::var(x)),
        };
        let mut atoms = rest.clone();
        atoms.push(Atom::Geq(crate::linear::LinearTerm::var(x)));
        if let Some(m) = n.with(n.coeff.clone(), atoms, n.exp.substitute(x, &by)) {
            sheared.push(m);
        }
    }
    let k3 = sheared.len();
    tr.replace(i, k2, sheared.clone(), Rule::R3_shear, format!("{x} onto the naturals"));

    let p = tr.base.p().clone();
    let mut summed = Vec::new();
    for n in &sheared {
        let b = n.exp.coeff(x);
        debug_assert!(b.is_integer() && b.is_negative());
        let e = -b.to_integer();
        let pe = pow_rat(&p, &e);
        let factor = &pe / (&pe - Rat::one());
        let atoms: Vec<Atom> = n.atoms.iter().filter(|a| !a.mentions(x)).cloned().collect();
        let mut m = n.clone();
        m.coeff = &n.coeff * factor;
        m.atoms = atoms;
        m.exp = n.exp.without(x);
        m.vars.retain(|v| v != x);
        summed.push(m);
    }
    tr.replace(i, k3, summed, Rule::GeomSum, format!("sum over {x}"));
    Ok(())
}

fn setup(xi: &Presentation) -> (Vec<Step>, Presentation) {
    let mut steps = Vec::new();
    let mut cur = xi.clone();
    let mut push = |cur: &mut Presentation, next: Vec<Generator>, rule: Rule, note: &str| {
        let next = cur.with_generators(next);
        if next != *cur {
            steps.push(Step { rule, before: cur.clone(), after: next.clone(), note: note.to_string() });
            *cur = next;
        }
    };
    let gs: Vec<Generator> = cur.generators.iter().filter(|g| !g.cell.is_degenerate()).cloned().collect();
    push(&mut cur, gs, Rule::R2, "drop null cells");
    let map_coords = |cur: &Presentation, f: &dyn Fn(u32) -> Coord| -> Vec<Generator> {
        cur.generators
            .iter()
            .map(|g| {
                let mut g = g.clone();
                g.cell.coords = g
                    .cell
                    .coords
                    .iter()
                    .map(|c| match c {
                        Coord::Box { level, .. } => f(*level),
                        d => d.clone(),
                    })
                    .collect();
                g
            })
            .collect()
    };
    // Translations keep ac; the unit scaling then sets it to one.
    let gs = cur
        .generators
        .iter()
        .map(|g| {
            let mut g = g.clone();
            for c in &mut g.cell.coords {
                if let Coord::Box { center, .. } = c {
                    *center = Rat::zero();
                }
            }
            g
        })
        .collect();
    push(&mut cur, gs, Rule::R3_translate, "centres to 0");
    let gs = map_coords(&cur, &|level| Coord::Box { center: Rat::zero(), level, ac: Int::one() });
    push(&mut cur, gs, Rule::R3_scale, "angular components to 1");
    let gs = cur
        .generators
        .iter()
        .map(|g| {
            let mut g = g.clone();
            g.cell.weight = Some(explicit_weight(&g.cell));
            g
        })
        .collect();
    push(&mut cur, gs, Rule::R4, "explicit weights");
    let gs = cur
        .generators
        .iter()
        .map(|g| {
            let mut g = g.clone();
            let shift: i64 = g.cell.levels().iter().map(|l| 1 - i64::from(*l)).sum();
            let w = g.cell.weight.as_mut().expect("weights are explicit");
            w.c = w.c.add_constant(&(&w.r * Int::from(shift)));
            g.cell.coords = g.cell.coords.iter().map(|_| Coord::unit(Rat::zero())).collect();
            g
        })
        .collect();
    push(&mut cur, gs, Rule::L_acLevel, "levels to 1");
    (steps, cur)
}

fn is_basic(xi: &Presentation) -> bool {
    xi.generators.iter().all(|g| matches!(&g.cell.weight, Some(w) if !w.depends_on_lambda()))
        && BasicPresentation::certify(xi).is_ok()
}

/// `(ℓ, B, cert)` with `μ(B) = ℓ·μ(Ξ)`, `B` basic, and `cert` a replayable
/// chain from `ℓ·Ξ` to `B`.
pub fn normalize_to_basic(xi: &Presentation) -> Result<Normalized, RingError> {
    measure_function(xi)?;
    if is_basic(xi) {
        return Ok(Normalized {
            ell: Int::one(),
            basic: BasicPresentation::certify(xi)?,
            certificate: Certificate::default(),
        });
    }
    let (mut steps, set) = setup(xi);
    let domain = qe(&xi.param_domain);
    let mut split = Vec::new();
    for (i, g) in set.generators.iter().enumerate() {
        let w = g.cell.weight.as_ref().expect("weights are explicit");
        let exp = w.exponent(&g.cell.lambda_vars);
        for conj in disjoint_dnf(&Formula::and([qe(&g.cell.lambda), domain.clone()]).simplify()) {
            let Some(atoms) = simplify_conj(conj) else { continue };
            let origin =
                xi.generators.iter().enumerate().filter(|(_, h)| !h.cell.is_degenerate()).nth(i).map_or(i, |(j, _)| j);
            split.push(Gen {
                coeff: g.coeff.clone(),
                atoms,
                vars: g.cell.lambda_vars.clone(),
                exp: exp.clone(),
                origin,
            });
        }
    }
    let mut tr = Trace { base: xi, cur: Vec::new(), steps: Vec::new() };
    // The split step starts from the setup output, not from `cur`.
    let split_pres = xi.with_generators(split.iter().map(Gen::to_generator).collect());
    if split_pres != set {
        steps.push(Step { rule: Rule::CellSplit, before: set, after: split_pres, note: "disjoint cells".into() });
    }
    tr.cur = split;
    while let Some((i, x)) = tr.cur.iter().enumerate().find_map(|(i, g)| g.pick().map(|x| (i, x))) {
        one_round(&mut tr, i, &x)?;
    }
    steps.append(&mut tr.steps);
    let last = tr.snapshot();
    let ell = last.generators.iter().fold(Int::one(), |d, g| lcm(&d, g.coeff.denom()));
    let scale = rat_int(&ell);
    for st in &mut steps {
        st.before = st.before.scalar_mul(&scale);
        st.after = st.after.scalar_mul(&scale);
    }
    let basic = BasicPresentation::certify(&last.scalar_mul(&scale)).map_err(|e| match e {
        RingError::Diverges { generator, var } => {
            RingError::Diverges { generator: tr.cur.get(generator).map_or(generator, |g| g.origin), var }
        }
        e => e,
    })?;
    Ok(Normalized { ell, basic, certificate: Certificate { steps } })
}
