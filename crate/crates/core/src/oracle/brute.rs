use std::cell::Cell;
use std::collections::{BTreeSet, HashMap};

use num_traits::{Signed, ToPrimitive};

use super::OracleError;
use crate::linear::LinearTerm;
use crate::num::Int;
use crate::presburger::{Atom, EvalError, Formula};

/// Atom evaluations allowed for one call.
pub const DEFAULT_BUDGET: u64 = 2_000_000_000;

/// Truth table of a formula on `[-bound, bound]^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub vars: Vec<String>,
    pub bound: i64,
    pub points: BTreeSet<Vec<i64>>,
}

impl Table {
    pub fn contains(&self, pt: &[i64]) -> bool {
        self.points.contains(pt)
    }

    /// The table as a disjunction of points.
    pub fn to_formula(&self) -> Formula {
        Formula::or(self.points.iter().map(|pt| {
            Formula::and(
                self.vars.iter().zip(pt).map(|(v, x)| Formula::eq0(LinearTerm::var(v).add_constant(&Int::from(-x)))),
            )
        }))
    }

    /// Whether the quantifier-free `g` holds exactly on the table's points.
    pub fn agrees_with(&self, g: &Formula) -> Result<bool, EvalError> {
        if !g.is_quantifier_free() {
            return Err(EvalError::NotQuantifierFree);
        }
        let mut ok = true;
        box_points(self.vars.len(), self.bound, &mut |pt| {
            let env: HashMap<&str, Int> =
                self.vars.iter().map(String::as_str).zip(pt.iter().map(|x| Int::from(*x))).collect();
            let v = eval_qf(g, &|x| env.get(x).cloned());
            match v {
                Ok(b) if b == self.contains(pt) => true,
                _ => {
                    ok = false;
                    false
                }
            }
        });
        Ok(ok)
    }
}

fn eval_qf(f: &Formula, env: &dyn Fn(&str) -> Option<Int>) -> Result<bool, EvalError> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => a.eval(env).map_err(EvalError::MissingAssignment)?,
        Formula::Not(g) => !eval_qf(g, env)?,
        Formula::And(gs) => gs.iter().map(|g| eval_qf(g, env)).collect::<Result<Vec<_>, _>>()?.into_iter().all(|b| b),
        Formula::Or(gs) => gs.iter().map(|g| eval_qf(g, env)).collect::<Result<Vec<_>, _>>()?.into_iter().any(|b| b),
        _ => return Err(EvalError::NotQuantifierFree),
    })
}

/// Calls `f` on every point until it returns false.
fn box_points(n: usize, bound: i64, f: &mut dyn FnMut(&[i64]) -> bool) {
    let mut pt = vec![-bound; n];
    loop {
        if !f(&pt) {
            return;
        }
        let mut j = 0;
        loop {
            if j == n {
                return;
            }
            if pt[j] < bound {
                pt[j] += 1;
                break;
            }
            pt[j] = -bound;
            j += 1;
        }
    }
}

enum C {
    Const(bool),
    Geq(Vec<(usize, i64)>, i64),
    Eq(Vec<(usize, i64)>, i64),
    Div(i64, Vec<(usize, i64)>, i64),
    Not(Box<C>),
    And(Vec<C>),
    Or(Vec<C>),
    /// Slot, the slots bound outside it, body.
    Ex(usize, Vec<usize>, Box<C>),
    All(usize, Vec<usize>, Box<C>),
}

struct Compiler {
    slots: HashMap<String, usize>,
    scope: Vec<usize>,
    next: usize,
    max_coef: i64,
    max_const: i64,
    moduli: i64,
}

fn small(v: &Int) -> Result<i64, OracleError> {
    v.to_i64().filter(|x| x.abs() < 1 << 40).ok_or_else(|| OracleError::BudgetExceeded(format!("coefficient {v}")))
}

impl Compiler {
    fn term(&mut self, t: &LinearTerm) -> Result<(Vec<(usize, i64)>, i64), OracleError> {
        let mut out = Vec::new();
        for (v, c) in t.coeffs() {
            let c = small(c)?;
            self.max_coef = self.max_coef.max(c.abs());
            out.push((self.slots[v.as_str()], c));
        }
        let k = small(t.constant_part())?;
        self.max_const = self.max_const.max(k.abs());
        Ok((out, k))
    }

    fn compile(&mut self, f: &Formula) -> Result<C, OracleError> {
        Ok(match f {
            Formula::True => C::Const(true),
            Formula::False => C::Const(false),
            Formula::Atom(Atom::Geq(t)) => {
                let (c, k) = self.term(t)?;
                C::Geq(c, k)
            }
            Formula::Atom(Atom::Eq(t)) => {
                let (c, k) = self.term(t)?;
                C::Eq(c, k)
            }
            Formula::Atom(Atom::Div(m, t)) => {
                let m = small(&m.abs())?;
                self.moduli = num_integer::lcm(self.moduli, m);
                let (c, k) = self.term(t)?;
                C::Div(m, c, k)
            }
            Formula::Not(g) => C::Not(Box::new(self.compile(g)?)),
            Formula::And(gs) => C::And(gs.iter().map(|g| self.compile(g)).collect::<Result<_, _>>()?),
            Formula::Or(gs) => C::Or(gs.iter().map(|g| self.compile(g)).collect::<Result<_, _>>()?),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let slot = self.next;
                self.next += 1;
                let prev = self.slots.insert(v.clone(), slot);
                let outer = self.scope.clone();
                self.scope.push(slot);
                let body = self.compile(g)?;
                self.scope.pop();
                match prev {
                    Some(p) => self.slots.insert(v.clone(), p),
                    None => self.slots.remove(v),
                };
                if matches!(f, Formula::Exists(..)) {
                    C::Ex(slot, outer, Box::new(body))
                } else {
                    C::All(slot, outer, Box::new(body))
                }
            }
        })
    }
}

struct Ctx<'a> {
    scale: i64,
    slack: i64,
    spent: &'a Cell<u64>,
    budget: u64,
}

fn lin(c: &[(usize, i64)], k: i64, env: &[i64]) -> i64 {
    c.iter().fold(k, |a, (i, x)| a + x * env[*i])
}

fn eval(c: &C, env: &mut Vec<i64>, cx: &Ctx<'_>) -> Result<bool, OracleError> {
    Ok(match c {
        C::Const(b) => *b,
        C::Geq(t, k) | C::Eq(t, k) | C::Div(_, t, k) => {
            cx.spent.set(cx.spent.get() + 1);
            if cx.spent.get() > cx.budget {
                return Err(OracleError::BudgetExceeded(format!("more than {} atom evaluations", cx.budget)));
            }
            let v = lin(t, *k, env);
            match c {
                C::Geq(..) => v >= 0,
                C::Eq(..) => v == 0,
                C::Div(m, ..) => v.rem_euclid(*m) == 0,
                _ => unreachable!(),
            }
        }
        C::Not(g) => !eval(g, env, cx)?,
        C::And(gs) => {
            for g in gs {
                if !eval(g, env, cx)? {
                    return Ok(false);
                }
            }
            true
        }
        C::Or(gs) => {
            for g in gs {
                if eval(g, env, cx)? {
                    return Ok(true);
                }
            }
            false
        }
        C::Ex(slot, outer, g) | C::All(slot, outer, g) => {
            let want = matches!(c, C::Ex(..));
            let size: i64 = outer.iter().map(|i| env[*i].abs()).sum();
            let range = cx.scale * size + cx.slack;
            for x in -range..=range {
                env[*slot] = x;
                if eval(g, env, cx)? == want {
                    return Ok(want);
                }
            }
            !want
        }
    })
}

/// Exhaustive truth table of `f` on `[-bound, bound]^n`. A quantifier
/// ranges over `[-B', B']` with `B' = c (|v| + k) + m c`, where `|v|` sums
/// the magnitudes of the variables bound outside it, `c` and `k` are the
/// largest coefficient and constant and `m` is the lcm of the moduli.
pub fn brute_force_qe(f: &Formula, bound: u32) -> Result<Table, OracleError> {
    brute_force_qe_with_budget(f, bound, DEFAULT_BUDGET)
}

pub fn brute_force_qe_with_budget(f: &Formula, bound: u32, budget: u64) -> Result<Table, OracleError> {
    let q = f.quantifier_count();
    if q > 3 {
        return Err(OracleError::BudgetExceeded(format!("{q} quantifiers (at most 3)")));
    }
    f.check_scoping().map_err(OracleError::Input)?;
    let vars: Vec<String> = f.free_vars().into_iter().collect();
    if vars.len() > 3 {
        return Err(OracleError::BudgetExceeded(format!("{} free variables (at most 3)", vars.len())));
    }
    let mut comp = Compiler {
        slots: vars.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect(),
        scope: (0..vars.len()).collect(),
        next: vars.len(),
        max_coef: 1,
        max_const: 0,
        moduli: 1,
    };
    let c = comp.compile(f)?;
    let bound = i64::from(bound);
    let scale = comp.max_coef;
    let slack = comp.max_coef * comp.max_const + comp.moduli * comp.max_coef;
    let spent = Cell::new(0);
    let cx = Ctx { scale, slack, spent: &spent, budget };
    let mut points = BTreeSet::new();
    let mut env = vec![0; comp.next];
    let mut err = None;
    box_points(vars.len(), bound, &mut |pt| {
        env[..pt.len()].copy_from_slice(pt);
        match eval(&c, &mut env, &cx) {
            Ok(true) => {
                points.insert(pt.to_vec());
                true
            }
            Ok(false) => true,
            Err(e) => {
                err = Some(e);
                false
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(Table { vars, bound, points }),
    }
}
