use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{Bracket, OracleError};
use crate::linear::{LinearTerm, QAffine};
use crate::num::{pow_rat, rat_int, Int, Rat};
use crate::padic::{BoxCell, Coord, PAdicContext, Weight};
use crate::presburger::{evaluate_qf, qe, Formula};
use crate::ring::Presentation;
use crate::semilinear::{rectilinearize, to_cells, RectilinearPiece};

/// Residue classes `u mod p^k` with `u ≡ ac (mod p^level)`, as a fraction of
/// all classes: `(fully inside, touching)`.
fn class_fraction(p: &Int, level: u32, ac: &Int, k: u32) -> (Rat, Rat) {
    let d = level.min(k);
    let pd = num_traits::pow(p.clone(), d as usize);
    let target = ac % &pd;
    let mut hits = Int::zero();
    let mut u = Int::zero();
    while u < pd {
        if u == target {
            hits += 1;
        }
        u += 1;
    }
    let frac = Rat::new(hits, pd);
    if level <= k {
        (frac.clone(), frac)
    } else {
        (Rat::zero(), frac)
    }
}

/// Exponent `W` with `vol(λ) = ρ · p^{W(λ)}`, as a rational affine form.
fn volume_exponent(cell: &BoxCell, s: &BTreeMap<String, Int>) -> Result<QAffine, OracleError> {
    let vars = &cell.lambda_vars;
    let sum: QAffine = vars.iter().fold(QAffine::zero(), |a, v| a.add(&QAffine::var(v)));
    match &cell.weight {
        None => Ok(sum.scale(&-Rat::one())),
        Some(Weight { r, c, b }) => {
            let c = c.eval(&|v| s.get(v).cloned()).map_err(|v| OracleError::Input(format!("`{v}` unassigned")))?;
            let mut t = LinearTerm::constant(c);
            for (v, bi) in vars.iter().zip(b) {
                t = t.add(&LinearTerm::monomial(v, bi.clone()));
            }
            // y carries p^{n + 1 + ν + Σλ} times its own class p^{-1}; the
            // boxes contribute p^{-Σλ}.
            let nu = t.to_qaffine().scale(&Rat::new(Int::one(), r.clone()));
            Ok(nu.add_constant(&rat_int(&Int::from(vars.len() + 1))))
        }
    }
}

fn fixed_lambda(cell: &BoxCell, s: &BTreeMap<String, Int>) -> Formula {
    let mut f = cell.lambda.clone();
    for (v, x) in s {
        f = f.substitute(v, &LinearTerm::constant(x.clone()));
    }
    qe(&f)
}

fn pieces(cell: &BoxCell, s: &BTreeMap<String, Int>, generator: usize) -> Result<Vec<RectilinearPiece>, OracleError> {
    let f = fixed_lambda(cell, s);
    rectilinearize(&to_cells(&f, &cell.lambda_vars, &[]))
        .map_err(|e| OracleError::Input(format!("generator {generator}: {e}")))
        .map(|ps| ps.into_iter().filter(|pc| evaluate_qf(&pc.param_guard, &BTreeMap::new()).unwrap_or(false)).collect())
}

struct PieceSum {
    /// Exact sum over the enumerated points.
    inside: Rat,
    /// Exact sum over the whole piece.
    total: Rat,
}

/// Sums `p^{W(λ)}` over one piece: the points `μ` with
/// `Σ|γ_j| μ_j <= budget` whose image lies in `[-window, window]^n` exactly,
/// and the whole piece by the geometric product.
fn piece_sum(
    pc: &RectilinearPiece,
    w: &QAffine,
    p: &Int,
    window: i64,
    budget: i64,
    generator: usize,
) -> Result<PieceSum, OracleError> {
    let vars = &pc.variables;
    let base: Vec<Int> = pc
        .base
        .iter()
        .map(|b| b.eval(&|_| None).ok().filter(|q| q.is_integer()).map(|q| q.to_integer()))
        .collect::<Option<_>>()
        .ok_or_else(|| OracleError::Input("piece base is not an integer point".into()))?;
    let at = |pt: &[Int]| -> Result<Int, OracleError> {
        let env: BTreeMap<&str, Int> = vars.iter().map(String::as_str).zip(pt.iter().cloned()).collect();
        let e = w.eval(&|v| env.get(v).cloned()).map_err(|v| OracleError::Input(format!("`{v}` unassigned")))?;
        if !e.is_integer() {
            return Err(OracleError::Input("weight is not an integer at a lattice point".into()));
        }
        Ok(e.to_integer())
    };
    let w0 = at(&base)?;
    let m = pc.dims();
    let mut gammas = Vec::new();
    for j in 0..m {
        let col: Vec<Int> = (0..vars.len()).map(|i| &base[i] + &pc.generators[i][j]).collect();
        let g = at(&col)? - &w0;
        if g >= Int::zero() {
            return Err(OracleError::Diverges { generator, direction: j });
        }
        gammas.push(g);
    }
    let mut total = pow_rat(p, &w0);
    for g in &gammas {
        total /= Rat::one() - pow_rat(p, g);
    }
    let in_window = |pt: &[Int]| pt.iter().all(|x| x <= &Int::from(window) && x >= &Int::from(-window));
    if m == 0 && !in_window(&base) {
        return Err(OracleError::WindowTooSmall { generator });
    }
    let mut inside = Rat::zero();
    let mut mu = vec![0i64; m];
    let cost: Vec<i64> = gammas.iter().map(|g| -i64::try_from(g).unwrap_or(i64::MAX)).collect();
    loop {
        let spent: i64 = mu.iter().zip(&cost).map(|(a, c)| a * c).sum();
        if spent <= budget {
            let pt: Vec<Int> = (0..vars.len())
                .map(|i| {
                    let mut x = base[i].clone();
                    for (j, k) in mu.iter().enumerate() {
                        x += &pc.generators[i][j] * Int::from(*k);
                    }
                    x
                })
                .collect();
            if in_window(&pt) {
                inside += pow_rat(p, &at(&pt)?);
            }
        }
        // Odometer over μ restricted to the cost budget.
        let mut j = 0;
        loop {
            if j == m {
                return Ok(PieceSum { inside, total });
            }
            mu[j] += 1;
            let spent: i64 = mu.iter().zip(&cost).map(|(a, c)| a * c).sum();
            if spent <= budget {
                break;
            }
            mu[j] = 0;
            j += 1;
        }
    }
}

/// Depth-`k` bracket for `μ_s(Ξ)` with valuations enumerated in
/// `[-window, window]`.
pub fn truncated_measure(
    xi: &Presentation,
    s: &BTreeMap<String, Int>,
    k: u32,
    window: u32,
    ctx: &PAdicContext,
) -> Result<Bracket, OracleError> {
    if k == 0 {
        return Err(OracleError::Input("depth must be at least 1".into()));
    }
    if let Some(v) = xi.param_vars.iter().find(|v| !s.contains_key(*v)) {
        return Err(OracleError::Input(format!("no value for parameter `{v}`")));
    }
    if !evaluate_qf(&qe(&xi.param_domain), s).unwrap_or(false) {
        return Err(OracleError::Input("parameter point outside the domain".into()));
    }
    let p = ctx.p();
    let mut lower = Rat::zero();
    let mut upper = Rat::zero();
    for (gi, g) in xi.generators.iter().enumerate() {
        let cell = &g.cell;
        if cell.is_degenerate() {
            continue;
        }
        let mut rho = (Rat::one(), Rat::one());
        for c in &cell.coords {
            if let Coord::Box { level, ac, .. } = c {
                let (a, b) = class_fraction(p, *level, ac, k);
                rho = (rho.0 * a, rho.1 * b);
            }
        }
        if cell.weight.is_some() {
            let (a, b) = class_fraction(p, 1, &Int::one(), k);
            rho = (rho.0 * a, rho.1 * b);
        }
        let w = volume_exponent(cell, s)?;
        let n = cell.lambda_vars.len() as i64 + 1;
        let cap = i64::from(k) + 2 * n + 4;
        let pcs = pieces(cell, s, gi)?;
        // Unenumerated mass allowed per piece, before the class fractions.
        let target = pow_rat(p, &(Int::from(2 * n) - Int::from(k) - Int::from(window)))
            / rat_int(&Int::from(pcs.len().max(1)))
            / &rho.1;
        let (mut lo, mut hi) = (Rat::zero(), Rat::zero());
        for pc in &pcs {
            let mut budget = 2;
            let ps = loop {
                let ps = piece_sum(pc, &w, p, i64::from(window), budget, gi)?;
                if budget >= cap || &ps.total - &ps.inside <= target {
                    break ps;
                }
                budget = (budget + 3).min(cap);
            };
            lo += ps.inside;
            hi += ps.total;
        }
        let (lo, hi) = (lo * rho.0, hi * rho.1);
        if g.coeff >= Rat::zero() {
            lower += &g.coeff * lo;
            upper += &g.coeff * hi;
        } else {
            lower += &g.coeff * hi;
            upper += &g.coeff * lo;
        }
    }
    Ok(Bracket { lower, upper, depth: k, valuation_window: window })
}

/// Bracket for `Σ_{λ ∈ Λ_s} p^{w(s, λ)}` with the points of `[-radius, radius]^n`
/// summed exactly and the rest bounded by the geometric tails.
pub fn partial_sum(
    lambda: &Formula,
    lambda_vars: &[String],
    weight: &Weight,
    s: &BTreeMap<String, Int>,
    radius: u32,
    ctx: &PAdicContext,
) -> Result<Bracket, OracleError> {
    let cell = BoxCell {
        coords: lambda_vars.iter().map(|_| Coord::unit(Rat::zero())).collect(),
        lambda_vars: lambda_vars.to_vec(),
        lambda: lambda.clone(),
        weight: Some(weight.clone()),
    };
    // Undo the `y` factor: the exponent is ν itself.
    let n = rat_int(&Int::from(lambda_vars.len() + 1));
    let w = volume_exponent(&cell, s)?.add_constant(&-n);
    let (mut lower, mut upper) = (Rat::zero(), Rat::zero());
    for pc in pieces(&cell, s, 0)? {
        let cost_cap = i64::from(radius) * (lambda_vars.len() as i64 + 1) * 4;
        let ps = match piece_sum(&pc, &w, ctx.p(), i64::from(radius), cost_cap, 0) {
            Err(OracleError::WindowTooSmall { .. }) => {
                let tail = piece_sum(&pc, &w, ctx.p(), i64::MAX / 4, 0, 0)?;
                PieceSum { inside: Rat::zero(), total: tail.total }
            }
            r => r?,
        };
        lower += ps.inside;
        upper += ps.total;
    }
    Ok(Bracket { lower, upper, depth: 0, valuation_window: radius })
}
