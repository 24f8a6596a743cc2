use std::collections::BTreeMap;

use thiserror::Error;

use super::Formula;
use crate::num::Int;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("formula is not quantifier-free")]
    NotQuantifierFree,
    #[error("no value assigned to variable `{0}`")]
    MissingAssignment(String),
}

fn eval_with(f: &Formula, env: &dyn Fn(&str) -> Option<Int>) -> Result<bool, EvalError> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => a.eval(env).map_err(EvalError::MissingAssignment)?,
        Formula::Not(g) => !eval_with(g, env)?,
        Formula::And(gs) => {
            for g in gs {
                if !eval_with(g, env)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(gs) => {
            for g in gs {
                if eval_with(g, env)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Exists(..) | Formula::Forall(..) => return Err(EvalError::NotQuantifierFree),
    })
}

/// Truth value of a quantifier-free formula at an integer point.
pub fn evaluate_qf(f: &Formula, assignment: &BTreeMap<String, Int>) -> Result<bool, EvalError> {
    if !f.is_quantifier_free() {
        return Err(EvalError::NotQuantifierFree);
    }
    eval_with(f, &|v| assignment.get(v).cloned())
}

/// Whether `f` and `g` agree on every point of `[-bound, bound]^n`, where
/// the coordinates are the union of their free variables.
pub fn equivalent_on_box(f: &Formula, g: &Formula, bound: u64) -> Result<bool, EvalError> {
    if !f.is_quantifier_free() || !g.is_quantifier_free() {
        return Err(EvalError::NotQuantifierFree);
    }
    let mut vars: Vec<String> = f.free_vars().into_iter().collect();
    for v in g.free_vars() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    let b = bound as i64;
    let mut point = vec![-b; vars.len()];
    loop {
        let env = |name: &str| vars.iter().position(|v| v == name).map(|i| Int::from(point[i]));
        if eval_with(f, &env)? != eval_with(g, &env)? {
            return Ok(false);
        }
        let mut i = 0;
        loop {
            if i == point.len() {
                return Ok(true);
            }
            if point[i] < b {
                point[i] += 1;
                break;
            }
            point[i] = -b;
            i += 1;
        }
    }
}
