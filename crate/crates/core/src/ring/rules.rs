//! Measure-preserving rewrites of single generators. Each application
//! yields a certificate step.

use num_traits::{One, Zero};

use crate::linear::LinearTerm;
use crate::num::{modulo, pow_rat, Int, Rat};
use crate::padic::{BoxCell, Coord, Weight};
use crate::presburger::{Atom, Formula};

use super::presentation::{explicit_weight, fiber_product};
use super::{Generator, Presentation, RingError, Rule, Step};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleApp {
    /// Split generator `gen` along an atom and its negation.
    Split { gen: usize, atom: Atom },
    /// Append a null cell.
    AddNull { coeff: Rat, point: Rat },
    /// Move the centre of one box coordinate.
    Translate { gen: usize, coord: usize, center: Rat },
    /// Replace the angular component of a box coordinate by another unit.
    Rescale { gen: usize, coord: usize, ac: Int },
    /// Reorder the coordinates of a generator.
    Permute { gen: usize, perm: Vec<usize> },
    /// Split an angular-component class into `p` classes one level up.
    RefineLevel { gen: usize, coord: usize },
    /// Make the weight of a generator explicit.
    Explicit { gen: usize },
    /// `λ_a ↦ λ_a + λ_b` on an explicitly weighted generator.
    Shear { gen: usize, a: usize, b: usize },
    /// Multiply a generator by `[ℤ_p]`.
    UnitBall { gen: usize },
    /// Multiply a generator by `(p^n - 1)[P(Δ_n)]`.
    Delta { gen: usize, n: usize },
    /// Multiply by `(1 - p^-n) [P(ℕ, -nλ)]`.
    Geometric { gen: usize, n: u32 },
    /// Shift the weight by `k` and divide the coefficient by `p^k`.
    Shift { gen: usize, k: i64 },
}

fn bad(msg: impl Into<String>) -> RingError {
    RingError::Input(msg.into())
}

fn gen_at(xi: &Presentation, i: usize) -> Result<&Generator, RingError> {
    xi.generators.get(i).ok_or_else(|| bad(format!("no generator {i}")))
}

fn replace(xi: &Presentation, i: usize, by: Vec<Generator>) -> Presentation {
    let mut g = xi.generators.clone();
    g.splice(i..=i, by);
    xi.with_generators(g)
}

fn weighted(c: &BoxCell) -> Result<Weight, RingError> {
    c.weight.clone().ok_or_else(|| bad("rule needs an explicitly weighted cell"))
}

impl RuleApp {
    pub fn rule(&self) -> Rule {
        match self {
            RuleApp::Split { .. } => Rule::R1,
            RuleApp::AddNull { .. } => Rule::R2,
            RuleApp::Translate { .. } => Rule::R3_translate,
            RuleApp::Rescale { .. } => Rule::R3_scale,
            RuleApp::Permute { .. } => Rule::R3_coordperm,
            RuleApp::RefineLevel { .. } => Rule::L_acLevel,
            RuleApp::Explicit { .. } => Rule::R4,
            RuleApp::Shear { .. } => Rule::R3_shear,
            RuleApp::UnitBall { .. } => Rule::R4,
            RuleApp::Delta { .. } => Rule::L_Delta,
            RuleApp::Geometric { .. } => Rule::GeomSum,
            RuleApp::Shift { .. } => Rule::L_product,
        }
    }

    pub fn apply(&self, xi: &Presentation) -> Result<Step, RingError> {
        let p = xi.p().clone();
        let after = match self {
            RuleApp::Split { gen, atom } => {
                let g = gen_at(xi, *gen)?;
                let mut a = g.clone();
                let mut b = g.clone();
                a.cell.lambda = Formula::and([g.cell.lambda.clone(), Formula::Atom(atom.clone())]);
                b.cell.lambda = Formula::and([g.cell.lambda.clone(), Formula::not(Formula::Atom(atom.clone()))]);
                replace(xi, *gen, vec![a, b])
            }
            RuleApp::AddNull { coeff, point } => {
                let mut g = xi.generators.clone();
                g.push(Generator {
                    coeff: coeff.clone(),
                    cell: BoxCell {
                        coords: vec![Coord::Degenerate(point.clone())],
                        lambda_vars: Vec::new(),
                        lambda: Formula::True,
                        weight: None,
                    },
                });
                xi.with_generators(g)
            }
            RuleApp::Translate { gen, coord, center } => {
                let mut g = gen_at(xi, *gen)?.clone();
                match g.cell.coords.get_mut(*coord) {
                    Some(Coord::Box { center: c, .. }) => *c = center.clone(),
                    _ => return Err(bad("translation needs a box coordinate")),
                }
                replace(xi, *gen, vec![g])
            }
            RuleApp::Rescale { gen, coord, ac } => {
                let mut g = gen_at(xi, *gen)?.clone();
                match g.cell.coords.get_mut(*coord) {
                    Some(Coord::Box { level, ac: a, .. }) => {
                        if !xi.ctx.is_unit_residue(ac) {
                            return Err(bad("angular component must be a unit"));
                        }
                        *a = modulo(ac, &num_traits::pow(p.clone(), *level as usize));
                    }
                    _ => return Err(bad("scaling needs a box coordinate")),
                }
                replace(xi, *gen, vec![g])
            }
            RuleApp::Permute { gen, perm } => {
                let g = gen_at(xi, *gen)?;
                let n = g.cell.coords.len();
                let mut seen = perm.clone();
                seen.sort();
                if seen != (0..n).collect::<Vec<_>>() {
                    return Err(bad("not a permutation of the coordinates"));
                }
                // Valuation variable of each box coordinate.
                let mut slot = Vec::new();
                let mut k = 0;
                for c in &g.cell.coords {
                    if matches!(c, Coord::Box { .. }) {
                        slot.push(Some(k));
                        k += 1;
                    } else {
                        slot.push(None);
                    }
                }
                let mut h = g.clone();
                h.cell.coords = perm.iter().map(|&j| g.cell.coords[j].clone()).collect();
                let order: Vec<usize> = perm.iter().filter_map(|&j| slot[j]).collect();
                h.cell.lambda_vars = order.iter().map(|&j| g.cell.lambda_vars[j].clone()).collect();
                if let Some(w) = &mut h.cell.weight {
                    w.b = order.iter().map(|&j| g.cell.weight.as_ref().unwrap().b[j].clone()).collect();
                }
                replace(xi, *gen, vec![h])
            }
            RuleApp::RefineLevel { gen, coord } => {
                let g = gen_at(xi, *gen)?;
                let Some(Coord::Box { center, level, ac }) = g.cell.coords.get(*coord) else {
                    return Err(bad("level refinement needs a box coordinate"));
                };
                let step = num_traits::pow(p.clone(), *level as usize);
                let mut out = Vec::new();
                let mut k = Int::zero();
                while k < p {
                    let mut h = g.clone();
                    h.cell.coords[*coord] =
                        Coord::Box { center: center.clone(), level: level + 1, ac: ac + &k * &step };
                    out.push(h);
                    k += 1;
                }
                replace(xi, *gen, out)
            }
            RuleApp::Explicit { gen } => {
                let mut g = gen_at(xi, *gen)?.clone();
                g.cell.weight = Some(explicit_weight(&g.cell));
                replace(xi, *gen, vec![g])
            }
            RuleApp::Shear { gen, a, b } => {
                let mut g = gen_at(xi, *gen)?.clone();
                let mut w = weighted(&g.cell)?;
                let vars = &g.cell.lambda_vars;
                if a == b || *a >= vars.len() || *b >= vars.len() {
                    return Err(bad("shear needs two distinct valuation variables"));
                }
                // λ' = λ with λ'_a = λ_a + λ_b, so Λ' = Λ[λ_a := λ_a - λ_b].
                let by = LinearTerm::var(&vars[*a]).sub(&LinearTerm::var(&vars[*b]));
                g.cell.lambda = g.cell.lambda.substitute(&vars[*a], &by);
                w.b[*b] = &w.b[*b] - &w.b[*a];
                g.cell.weight = Some(w);
                replace(xi, *gen, vec![g])
            }
            RuleApp::UnitBall { gen } => {
                let g = gen_at(xi, *gen)?;
                let out = Presentation::ball_generators(&p, 0)
                    .into_iter()
                    .map(|b| Generator { coeff: g.coeff.clone(), cell: fiber_product(&g.cell, &b.cell) })
                    .collect();
                replace(xi, *gen, out)
            }
            RuleApp::Delta { gen, n } => {
                let g = gen_at(xi, *gen)?;
                let f = pow_rat(&p, &Int::from(*n)) - Rat::one();
                let cell = fiber_product(&g.cell, &Presentation::delta_cell(*n));
                replace(xi, *gen, vec![Generator { coeff: &g.coeff * f, cell }])
            }
            RuleApp::Geometric { gen, n } => {
                let g = gen_at(xi, *gen)?;
                let f = Rat::one() - pow_rat(&p, &-Int::from(*n));
                let tail = BoxCell {
                    coords: vec![Coord::unit(Rat::zero())],
                    lambda_vars: vec!["l1".into()],
                    lambda: Formula::geq(LinearTerm::var("l1")),
                    weight: Some(Weight { r: Int::one(), c: LinearTerm::zero(), b: vec![-Int::from(*n)] }),
                };
                let cell = fiber_product(&g.cell, &tail);
                replace(xi, *gen, vec![Generator { coeff: &g.coeff * f, cell }])
            }
            RuleApp::Shift { gen, k } => {
                let mut g = gen_at(xi, *gen)?.clone();
                let mut w = weighted(&g.cell)?;
                w.c = w.c.add_constant(&(&w.r * Int::from(*k)));
                g.cell.weight = Some(w);
                g.coeff = &g.coeff * pow_rat(&p, &-Int::from(*k));
                replace(xi, *gen, vec![g])
            }
        };
        Ok(Step { rule: self.rule(), before: xi.clone(), after, note: format!("{self:?}") })
    }
}
