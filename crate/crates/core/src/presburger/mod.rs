//! Presburger formulas over integer variables: syntax tree, text form,
//! evaluation and Cooper-style quantifier elimination.

mod eval;
mod parse;
mod qe;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::linear::LinearTerm;
use crate::num::{gcd, modulo, Int};

pub use eval::{equivalent_on_box, evaluate_qf, EvalError};
pub use parse::{parse, parse_term, SyntaxError};
pub use qe::qe;

/// An atomic constraint, already in `t >= 0`, `t = 0` or `m | t` form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Geq(LinearTerm),
    Eq(LinearTerm),
    /// Modulus is at least two.
    Div(Int, LinearTerm),
}

/// Result of simplifying an atom: either a canonical atom or a truth value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Normal {
    Atom(Atom),
    Const(bool),
}

impl Atom {
    pub fn term(&self) -> &LinearTerm {
        match self {
            Atom::Geq(t) | Atom::Eq(t) | Atom::Div(_, t) => t,
        }
    }

    pub fn map_term(&self, f: impl FnOnce(&LinearTerm) -> LinearTerm) -> Atom {
        match self {
            Atom::Geq(t) => Atom::Geq(f(t)),
            Atom::Eq(t) => Atom::Eq(f(t)),
            Atom::Div(m, t) => Atom::Div(m.clone(), f(t)),
        }
    }

    pub fn mentions(&self, v: &str) -> bool {
        self.term().mentions(v)
    }

    pub fn substitute(&self, v: &str, by: &LinearTerm) -> Atom {
        self.map_term(|t| t.substitute(v, by))
    }

    pub fn eval(&self, assignment: &dyn Fn(&str) -> Option<Int>) -> Result<bool, String> {
        Ok(match self {
            Atom::Geq(t) => !t.eval(assignment)?.is_negative(),
            Atom::Eq(t) => t.eval(assignment)?.is_zero(),
            Atom::Div(m, t) => modulo(&t.eval(assignment)?, m).is_zero(),
        })
    }

    /// Divide out coefficient gcds (tightening inequalities), reduce
    /// divisibility terms modulo their modulus, fold constant atoms.
    pub fn normalize(&self) -> Normal {
        match self {
            Atom::Geq(t) => {
                if t.is_constant() {
                    return Normal::Const(!t.constant_part().is_negative());
                }
                let g = t.content();
                if g.is_one() {
                    return Normal::Atom(self.clone());
                }
                let c = num_integer::Integer::div_floor(t.constant_part(), &g);
                let lin = LinearTerm::from_parts(t.coeffs().iter().map(|(v, a)| (v.clone(), a / &g)), c);
                Normal::Atom(Atom::Geq(lin))
            }
            Atom::Eq(t) => {
                if t.is_constant() {
                    return Normal::Const(t.constant_part().is_zero());
                }
                let g = t.content();
                if !(t.constant_part() % &g).is_zero() {
                    return Normal::Const(false);
                }
                let mut lin =
                    LinearTerm::from_parts(t.coeffs().iter().map(|(v, a)| (v.clone(), a / &g)), t.constant_part() / &g);
                // Leading coefficient positive.
                if lin.coeffs().values().next().is_some_and(|a| a.is_negative()) {
                    lin = lin.neg();
                }
                Normal::Atom(Atom::Eq(lin))
            }
            Atom::Div(m, t) => {
                let m = m.abs();
                if m.is_zero() {
                    return Atom::Eq(t.clone()).normalize();
                }
                let reduced = LinearTerm::from_parts(
                    t.coeffs().iter().map(|(v, a)| (v.clone(), modulo(a, &m))),
                    modulo(t.constant_part(), &m),
                );
                if reduced.is_constant() {
                    return Normal::Const(reduced.constant_part().is_zero());
                }
                let g = gcd(&reduced.content(), &m);
                let g = gcd(&g, reduced.constant_part());
                let (m, reduced) = if g.is_one() {
                    (m, reduced)
                } else {
                    (
                        &m / &g,
                        LinearTerm::from_parts(
                            reduced.coeffs().iter().map(|(v, a)| (v.clone(), a / &g)),
                            reduced.constant_part() / &g,
                        ),
                    )
                };
                if m.is_one() {
                    return Normal::Const(true);
                }
                // m | c*x with gcd(c, m) = 1 for a single variable leaves c = 1
                // after multiplying by the inverse; keep it simple and return.
                Normal::Atom(Atom::Div(m, reduced))
            }
        }
    }

    /// Negation as a disjunction of pairwise disjoint atoms.
    pub fn negate(&self) -> Vec<Atom> {
        match self {
            Atom::Geq(t) => vec![Atom::Geq(t.neg().add_constant(&-Int::one()))],
            Atom::Eq(t) => vec![Atom::Geq(t.add_constant(&-Int::one())), Atom::Geq(t.neg().add_constant(&-Int::one()))],
            Atom::Div(m, t) => {
                let mut out = Vec::new();
                let mut r = Int::one();
                while &r < m {
                    out.push(Atom::Div(m.clone(), t.add_constant(&-&r)));
                    r += 1;
                }
                out
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Geq(t) => write!(f, "{t} >= 0"),
            Atom::Eq(t) => write!(f, "{t} = 0"),
            Atom::Div(m, t) => write!(f, "{m} | {t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Formula {
        Formula::Atom(a)
    }

    pub fn geq(t: LinearTerm) -> Formula {
        Formula::Atom(Atom::Geq(t))
    }

    pub fn eq0(t: LinearTerm) -> Formula {
        Formula::Atom(Atom::Eq(t))
    }

    pub fn divides(m: impl Into<Int>, t: LinearTerm) -> Formula {
        Formula::Atom(Atom::Div(m.into(), t))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            g => Formula::Not(Box::new(g)),
        }
    }

    /// Conjunction with `True`/`False` folding and flattening.
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn exists(v: &str, f: Formula) -> Formula {
        Formula::Exists(v.to_string(), Box::new(f))
    }

    pub fn forall(v: &str, f: Formula) -> Formula {
        Formula::Forall(v.to_string(), Box::new(f))
    }

    pub fn conj_atoms(atoms: impl IntoIterator<Item = Atom>) -> Formula {
        Formula::and(atoms.into_iter().map(Formula::Atom))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(g) => g.is_quantifier_free(),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().all(Formula::is_quantifier_free),
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    pub fn quantifier_count(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(g) => g.quantifier_count(),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().map(Formula::quantifier_count).sum(),
            Formula::Exists(_, g) | Formula::Forall(_, g) => 1 + g.quantifier_count(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                for v in a.term().vars() {
                    if !bound.contains(v) {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::Not(g) => g.collect_free(bound, out),
            Formula::And(gs) | Formula::Or(gs) => {
                for g in gs {
                    g.collect_free(bound, out);
                }
            }
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                bound.push(v.clone());
                g.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every atom occurring in the formula, in order.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| out.push(a));
        out
    }

    fn visit_atoms<'a>(&'a self, f: &mut dyn FnMut(&'a Atom)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => f(a),
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.visit_atoms(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_atoms(f)),
        }
    }

    /// Rewrite every atom; quantified variables are left alone, so callers
    /// must only substitute free variables.
    pub fn map_atoms(&self, f: &dyn Fn(&Atom) -> Formula) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => f(a),
            Formula::Not(g) => Formula::not(g.map_atoms(f)),
            Formula::And(gs) => Formula::and(gs.iter().map(|g| g.map_atoms(f))),
            Formula::Or(gs) => Formula::or(gs.iter().map(|g| g.map_atoms(f))),
            Formula::Exists(v, g) => Formula::exists(v, g.map_atoms(f)),
            Formula::Forall(v, g) => Formula::forall(v, g.map_atoms(f)),
        }
    }

    pub fn substitute(&self, v: &str, by: &LinearTerm) -> Formula {
        self.map_atoms(&|a| {
            if a.mentions(v) {
                Formula::Atom(a.substitute(v, by))
            } else {
                Formula::Atom(a.clone())
            }
        })
    }

    pub fn rename(&self, map: &HashMap<String, String>) -> Formula {
        self.map_atoms(&|a| Formula::Atom(a.map_term(|t| t.rename(map))))
    }

    /// Fold constant atoms and tighten the rest.
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::Atom(a) => match a.normalize() {
                Normal::Const(true) => Formula::True,
                Normal::Const(false) => Formula::False,
                Normal::Atom(a) => Formula::Atom(a),
            },
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Not(g) => Formula::not(g.simplify()),
            Formula::And(gs) => Formula::and(gs.iter().map(Formula::simplify)),
            Formula::Or(gs) => Formula::or(gs.iter().map(Formula::simplify)),
            Formula::Exists(v, g) => Formula::exists(v, g.simplify()),
            Formula::Forall(v, g) => Formula::forall(v, g.simplify()),
        }
    }

    /// Checks that no quantifier rebinds a variable already bound above it.
    pub fn check_scoping(&self) -> Result<(), String> {
        fn go(f: &Formula, bound: &mut Vec<String>) -> Result<(), String> {
            match f {
                Formula::True | Formula::False | Formula::Atom(_) => Ok(()),
                Formula::Not(g) => go(g, bound),
                Formula::And(gs) | Formula::Or(gs) => gs.iter().try_for_each(|g| go(g, bound)),
                Formula::Exists(v, g) | Formula::Forall(v, g) => {
                    if bound.contains(v) {
                        return Err(format!("variable `{v}` is bound twice"));
                    }
                    bound.push(v.clone());
                    let r = go(g, bound);
                    bound.pop();
                    r
                }
            }
        }
        go(self, &mut Vec::new())
    }
}

// Printing levels: 0 = quantifier/top, 1 = disjunction operand, 2 = conjunction operand.
fn write_formula(f: &Formula, level: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match f {
        Formula::True => write!(out, "true"),
        Formula::False => write!(out, "false"),
        Formula::Atom(a) => write!(out, "{a}"),
        Formula::Not(g) => {
            write!(out, "!")?;
            match g.as_ref() {
                Formula::True | Formula::False | Formula::Atom(_) | Formula::Not(_) => write_formula(g, 3, out),
                _ => {
                    write!(out, "(")?;
                    write_formula(g, 0, out)?;
                    write!(out, ")")
                }
            }
        }
        Formula::And(gs) => {
            let paren = level > 1;
            if paren {
                write!(out, "(")?;
            }
            for (i, g) in gs.iter().enumerate() {
                if i > 0 {
                    write!(out, " /\\ ")?;
                }
                // Nested conjunctions need parentheses to survive a reparse.
                let lvl = if matches!(g, Formula::And(_)) { 3 } else { 2 };
                write_formula(g, lvl, out)?;
            }
            if paren {
                write!(out, ")")?;
            }
            Ok(())
        }
        Formula::Or(gs) => {
            let paren = level > 0;
            if paren {
                write!(out, "(")?;
            }
            for (i, g) in gs.iter().enumerate() {
                if i > 0 {
                    write!(out, " \\/ ")?;
                }
                let lvl = if matches!(g, Formula::Or(_)) { 3 } else { 1 };
                write_formula(g, lvl, out)?;
            }
            if paren {
                write!(out, ")")?;
            }
            Ok(())
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let q = if matches!(f, Formula::Exists(..)) { "E" } else { "A" };
            let paren = level > 0;
            if paren {
                write!(out, "(")?;
            }
            write!(out, "{q} {v}. ")?;
            write_formula(g, 0, out)?;
            if paren {
                write!(out, ")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, 0, f)
    }
}
