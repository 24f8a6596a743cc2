use thiserror::Error;

use super::cells::GuardedCell;
use super::elim::{atom_vars, project, simplify_conj};
use crate::linear::LinearTerm;
use crate::num::Int;
use crate::presburger::Atom;
use num_integer::Integer;
use num_traits::{Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("fiber has more than {0} points")]
    Capped(usize),
}

/// Integer solutions of a conjunction in one variable, or `None` if the
/// range is unbounded.
fn range_1d(atoms: &[Atom], x: &str) -> Option<Vec<Int>> {
    let (mut lo, mut hi): (Option<Int>, Option<Int>) = (None, None);
    for a in atoms {
        let c = a.term().coeff(x);
        let k = a.term().constant_part();
        match a {
            Atom::Geq(_) if c.is_positive() => {
                let b = (-k).div_ceil(&c);
                lo = Some(lo.map_or(b.clone(), |l| l.max(b)));
            }
            Atom::Geq(_) if c.is_negative() => {
                let b = k.div_floor(&-&c);
                hi = Some(hi.map_or(b.clone(), |h| h.min(b)));
            }
            Atom::Eq(_) if !c.is_zero() => {
                if !(k % &c).is_zero() {
                    return Some(Vec::new());
                }
                let v = -k / &c;
                lo = Some(lo.map_or(v.clone(), |l| l.max(v.clone())));
                hi = Some(hi.map_or(v.clone(), |h| h.min(v)));
            }
            _ => {}
        }
    }
    let (lo, hi) = (lo?, hi?);
    let mut out = Vec::new();
    let mut v = lo;
    while v <= hi {
        let env = |_: &str| Some(v.clone());
        if atoms.iter().all(|a| a.eval(&env).unwrap_or(false)) {
            out.push(v.clone());
        }
        v += 1;
    }
    Some(out)
}

fn enumerate_conj(
    atoms: Vec<Atom>,
    vars: &[String],
    prefix: &mut Vec<Int>,
    out: &mut Vec<Vec<Int>>,
    cap: usize,
) -> Result<(), EnumerateError> {
    let Some(atoms) = simplify_conj(atoms) else { return Ok(()) };
    let Some((x, rest)) = vars.split_first() else {
        out.push(prefix.clone());
        if out.len() > cap {
            return Err(EnumerateError::Capped(cap));
        }
        return Ok(());
    };
    // Project the later variables away to find the range of x.
    let mut shadows = vec![atoms.clone()];
    for y in rest.iter().rev() {
        shadows = shadows.iter().flat_map(|c| project(c, y)).collect();
    }
    let mut values: Vec<Int> = Vec::new();
    for s in &shadows {
        let extra: Vec<String> = atom_vars(s).into_iter().filter(|v| v != x).collect();
        assert!(extra.is_empty(), "unassigned variables {extra:?} in fiber");
        match range_1d(s, x) {
            Some(v) => values.extend(v),
            None => return Err(EnumerateError::Capped(cap)),
        }
    }
    values.sort();
    values.dedup();
    for v in values {
        let by = LinearTerm::constant(v.clone());
        let sub: Vec<Atom> = atoms.iter().map(|a| a.substitute(x, &by)).collect();
        prefix.push(v);
        enumerate_conj(sub, rest, prefix, out, cap)?;
        prefix.pop();
    }
    Ok(())
}

/// Lists the fiber over a parameter point, sorted, or reports that it
/// exceeds `cap` points (including when it is infinite).
pub fn enumerate_fiber(
    cells: &[GuardedCell],
    params: &[(String, Int)],
    cap: usize,
) -> Result<Vec<Vec<Int>>, EnumerateError> {
    let mut out = Vec::new();
    for c in cells {
        let mut atoms = c.all_atoms();
        for (s, v) in params {
            let by = LinearTerm::constant(v.clone());
            atoms = atoms.iter().map(|a| a.substitute(s, &by)).collect();
        }
        enumerate_conj(atoms, &c.variables, &mut Vec::new(), &mut out, cap)?;
    }
    out.sort();
    out.dedup();
    if out.len() > cap {
        return Err(EnumerateError::Capped(cap));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presburger::parse;
    use crate::semilinear::to_cells;

    fn cells(text: &str, vars: &[&str]) -> Vec<GuardedCell> {
        let v: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        to_cells(&parse(text).unwrap(), &v, &["s".to_string()])
    }

    fn ints(v: &[i64]) -> Vec<Vec<Int>> {
        v.iter().map(|x| vec![Int::from(*x)]).collect()
    }

    #[test]
    fn small_interval() {
        let c = cells("0 <= l /\\ l < 3", &["l"]);
        assert_eq!(enumerate_fiber(&c, &[("s".into(), Int::from(7))], 100).unwrap(), ints(&[0, 1, 2]));
    }

    #[test]
    fn even_points_below_s() {
        let c = cells("0 <= l /\\ l < s /\\ 2 | l", &["l"]);
        assert_eq!(enumerate_fiber(&c, &[("s".into(), Int::from(5))], 100).unwrap(), ints(&[0, 2, 4]));
    }

    #[test]
    fn capped() {
        let c = cells("l >= 0", &["l"]);
        assert_eq!(enumerate_fiber(&c, &[], 10), Err(EnumerateError::Capped(10)));
    }

    #[test]
    fn triangle() {
        let c = cells("l1 >= 0 /\\ l2 >= 0 /\\ l1 + 2*l2 <= s", &["l1", "l2"]);
        let pts = enumerate_fiber(&c, &[("s".into(), Int::from(4))], 100).unwrap();
        assert_eq!(pts.len(), 5 + 3 + 1);
    }
}
