use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use super::cells::GuardedCell;
use super::elim::{intervals, max_value, prepare, qaffine_geq, Extremum, Piece, Rewrite};
use crate::linear::QAffine;
use crate::num::{rat_int, Int, Rat};
use crate::presburger::{Atom, Formula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RectError {
    #[error("cell {cell} is not rectilinearizable: every variable order meets a two-sided bound whose length is unbounded or depends on parameters")]
    NotRectilinearizable { cell: usize },
}

/// `λ = base(s) + M μ` for `μ` ranging over `ℕ^m`, when `param_guard` holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RectilinearPiece {
    pub variables: Vec<String>,
    pub base: Vec<QAffine>,
    /// Row-major `n × m`.
    pub generators: Vec<Vec<Int>>,
    pub param_guard: Formula,
}

impl RectilinearPiece {
    pub fn dims(&self) -> usize {
        self.generators.first().map_or(0, Vec::len)
    }

    /// The point for `μ` at the parameter point `env`.
    pub fn image(&self, mu: &[Int], env: &dyn Fn(&str) -> Option<Int>) -> Option<Vec<Int>> {
        let mut out = Vec::new();
        for (b, row) in self.base.iter().zip(&self.generators) {
            let v = b.eval(env).ok()?;
            if !v.is_integer() {
                return None;
            }
            let mut acc = v.to_integer();
            for (c, m) in row.iter().zip(mu) {
                acc += c * m;
            }
            out.push(acc);
        }
        Some(out)
    }
}

/// Affine image of one variable: `base + Σ coef_j μ_j`.
#[derive(Clone, Debug)]
struct Img {
    base: QAffine,
    coef: BTreeMap<usize, Rat>,
}

struct Partial {
    guard: Vec<Atom>,
    images: BTreeMap<String, Img>,
    dims: usize,
}

/// Evaluates an affine form in the remaining variables on their images.
fn compose(e: &QAffine, images: &BTreeMap<String, Img>) -> Img {
    let mut base = QAffine::constant(e.constant_part().clone());
    let mut coef: BTreeMap<usize, Rat> = BTreeMap::new();
    for (v, c) in e.coeffs() {
        match images.get(v) {
            Some(img) => {
                base = base.add(&img.base.scale(c));
                for (j, k) in &img.coef {
                    *coef.entry(*j).or_insert_with(Rat::zero) += c * k;
                }
            }
            None => base = base.add(&QAffine::var(v).scale(c)),
        }
    }
    coef.retain(|_, c| !c.is_zero());
    Img { base, coef }
}

fn rect(atoms: &[Atom], vars: &[String], params_allowed: bool) -> Option<Vec<Partial>> {
    if vars.is_empty() {
        return Some(vec![Partial { guard: atoms.to_vec(), images: BTreeMap::new(), dims: 0 }]);
    }
    // Last variable first, then the others from the back.
    for x in vars.iter().rev() {
        if let Some(r) = rect_var(atoms, vars, x, params_allowed) {
            return Some(r);
        }
    }
    None
}

fn rect_var(atoms: &[Atom], vars: &[String], x: &str, params_allowed: bool) -> Option<Vec<Partial>> {
    let others: Vec<String> = vars.iter().filter(|v| *v != x).cloned().collect();
    let mut out = Vec::new();
    let piece = Piece { atoms: atoms.to_vec(), terms: Vec::new() };
    for (pc, rw) in prepare(&piece, x) {
        if let Rewrite::Solved(v) = &rw {
            for mut part in rect(&pc.atoms, &others, params_allowed)? {
                let img = compose(v, &part.images);
                part.images.insert(x.to_string(), img);
                out.push(part);
            }
            continue;
        }
        let (stride, offset) = match &rw {
            Rewrite::Stride(m, r) => (rat_int(m), rat_int(r)),
            _ => (Rat::one(), Rat::zero()),
        };
        for iv in intervals(&pc, x) {
            // Each entry: atoms for the rest, and x' as (form, new direction sign).
            let mut shapes: Vec<(Vec<Atom>, QAffine, Option<Rat>)> = Vec::new();
            match (&iv.lower, &iv.upper) {
                (Some(l), None) => shapes.push((iv.atoms.clone(), l.clone(), Some(Rat::one()))),
                (None, Some(u)) => shapes.push((iv.atoms.clone(), u.clone(), Some(-Rat::one()))),
                (None, None) => {
                    shapes.push((iv.atoms.clone(), QAffine::zero(), Some(Rat::one())));
                    shapes.push((iv.atoms.clone(), QAffine::constant(-Rat::one()), Some(-Rat::one())));
                }
                (Some(l), Some(u)) => {
                    let len = u.sub(l);
                    let depends_on_params = len.vars().any(|v| !others.contains(v));
                    if depends_on_params && !params_allowed {
                        return None;
                    }
                    let k = if len.is_constant() {
                        len.constant_part().to_integer()
                    } else {
                        let (t, d) = len.clear_denominators();
                        match max_value(&iv.atoms, &t) {
                            Extremum::Empty => continue,
                            Extremum::Unbounded => return None,
                            Extremum::Max(v) => num_integer::Integer::div_floor(&v, &d),
                        }
                    };
                    let mut j = Int::zero();
                    while j <= k {
                        let mut a = iv.atoms.clone();
                        if !len.is_constant() {
                            a.push(qaffine_geq(&len.add_constant(&-rat_int(&j))));
                        }
                        shapes.push((a, l.add_constant(&rat_int(&j)), None));
                        j += 1;
                    }
                }
            }
            for (rest, form, dir) in shapes {
                let Some(rest) = super::elim::simplify_conj(rest) else { continue };
                for mut part in rect(&rest, &others, params_allowed)? {
                    let mut img = compose(&form, &part.images);
                    if let Some(sign) = &dir {
                        img.coef.insert(part.dims, sign.clone());
                        part.dims += 1;
                    }
                    let img = Img {
                        base: img.base.scale(&stride).add_constant(&offset),
                        coef: img.coef.into_iter().map(|(j, c)| (j, c * &stride)).collect(),
                    };
                    part.images.insert(x.to_string(), img);
                    out.push(part);
                }
            }
        }
    }
    Some(out)
}

fn finish(parts: Vec<Partial>, vars: &[String]) -> Vec<RectilinearPiece> {
    parts
        .into_iter()
        .filter(|p| super::elim::satisfiable(&p.guard))
        .map(|p| {
            let base = vars.iter().map(|v| p.images[v].base.clone()).collect();
            let generators = vars
                .iter()
                .map(|v| {
                    (0..p.dims)
                        .map(|j| {
                            let c = p.images[v].coef.get(&j).cloned().unwrap_or_else(Rat::zero);
                            assert!(c.is_integer(), "generator entries are integral");
                            c.to_integer()
                        })
                        .collect()
                })
                .collect();
            RectilinearPiece { variables: vars.to_vec(), base, generators, param_guard: Formula::conj_atoms(p.guard) }
        })
        .collect()
}

/// Disjoint affine images of `ℕ^m` covering the cells. Bounded directions
/// become finite unions; their length may not depend on parameters.
pub fn rectilinearize(cells: &[GuardedCell]) -> Result<Vec<RectilinearPiece>, RectError> {
    let mut out = Vec::new();
    for (i, c) in cells.iter().enumerate() {
        let parts = rect(&c.all_atoms(), &c.variables, false).ok_or(RectError::NotRectilinearizable { cell: i })?;
        out.extend(finish(parts, &c.variables));
    }
    Ok(out)
}
