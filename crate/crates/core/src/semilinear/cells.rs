use std::collections::BTreeSet;
use std::fmt;

use super::elim::{satisfiable, simplify_conj};
use crate::presburger::{Atom, Formula};

/// A conjunction of atoms over λ-variables and parameters, split into the
/// part mentioning some λ and a guard over the parameters alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuardedCell {
    pub variables: Vec<String>,
    pub constraints: Vec<Atom>,
    pub param_guard: Formula,
}

impl GuardedCell {
    /// Every atom of the cell, guard included.
    pub fn all_atoms(&self) -> Vec<Atom> {
        let mut out = self.constraints.clone();
        out.extend(self.param_guard.atoms().into_iter().cloned());
        out
    }

    pub fn contains(&self, env: &dyn Fn(&str) -> Option<crate::num::Int>) -> bool {
        self.all_atoms().iter().all(|a| a.eval(env).unwrap_or(false))
    }
}

impl fmt::Display for GuardedCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = Formula::conj_atoms(self.constraints.iter().cloned());
        write!(f, "{{{}}} [{}] if {}", self.variables.join(", "), c, self.param_guard)
    }
}

/// Disjunctive normal form with only positive atoms, trivially false
/// conjunctions dropped.
fn dnf(f: &Formula, positive: bool) -> Vec<Vec<Atom>> {
    match (f, positive) {
        (Formula::True, true) | (Formula::False, false) => vec![Vec::new()],
        (Formula::True, false) | (Formula::False, true) => Vec::new(),
        (Formula::Atom(a), true) => vec![vec![a.clone()]],
        (Formula::Atom(a), false) => a.negate().into_iter().map(|b| vec![b]).collect(),
        (Formula::Not(g), _) => dnf(g, !positive),
        (Formula::And(gs), true) | (Formula::Or(gs), false) => {
            let mut acc: Vec<Vec<Atom>> = vec![Vec::new()];
            for g in gs {
                let parts = dnf(g, positive);
                let mut next = Vec::new();
                for a in &acc {
                    for b in &parts {
                        let merged: Vec<Atom> = a.iter().chain(b.iter()).cloned().collect();
                        if let Some(m) = simplify_conj(merged) {
                            next.push(m);
                        }
                    }
                }
                acc = next;
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
        (Formula::Or(gs), true) | (Formula::And(gs), false) => gs.iter().flat_map(|g| dnf(g, positive)).collect(),
        (Formula::Exists(..) | Formula::Forall(..), _) => {
            panic!("cell decomposition needs a quantifier-free formula")
        }
    }
}

/// `not (a_1 /\ ... /\ a_k)` as pairwise disjoint conjunctions:
/// `!a_1`, `a_1 /\ !a_2`, ...
pub fn complement(conj: &[Atom]) -> Vec<Vec<Atom>> {
    let mut out = Vec::new();
    for (i, a) in conj.iter().enumerate() {
        for neg in a.negate() {
            let mut c: Vec<Atom> = conj[..i].to_vec();
            c.push(neg);
            out.push(c);
        }
    }
    out
}

/// Intersects each region with a disjoint union of conjunctions.
pub fn refine(regions: Vec<Vec<Atom>>, parts: &[Vec<Atom>]) -> Vec<Vec<Atom>> {
    let mut out = Vec::new();
    for r in &regions {
        for p in parts {
            let merged: Vec<Atom> = r.iter().chain(p.iter()).cloned().collect();
            if let Some(m) = simplify_conj(merged) {
                if satisfiable(&m) {
                    out.push(m);
                }
            }
        }
    }
    out
}

/// Pairwise disjoint satisfiable conjunctions whose union is `f`.
pub fn disjoint_dnf(f: &Formula) -> Vec<Vec<Atom>> {
    let mut seen = BTreeSet::new();
    let disjuncts: Vec<Vec<Atom>> =
        dnf(f, true).into_iter().filter(|c| seen.insert(c.clone())).filter(|c| satisfiable(c)).collect();
    let mut out: Vec<Vec<Atom>> = Vec::new();
    for (i, c) in disjuncts.iter().enumerate() {
        let mut regions = vec![c.clone()];
        for earlier in &disjuncts[..i] {
            let mut both = c.clone();
            both.extend(earlier.iter().cloned());
            if !satisfiable(&both) {
                continue;
            }
            regions = refine(regions, &complement(earlier));
            if regions.is_empty() {
                break;
            }
        }
        out.extend(regions);
    }
    out
}

/// Disjoint conjunctive cells covering the solution set of `f`.
pub fn to_cells(f: &Formula, lambda_vars: &[String], _param_vars: &[String]) -> Vec<GuardedCell> {
    disjoint_dnf(f)
        .into_iter()
        .map(|atoms| {
            let (constraints, guard): (Vec<Atom>, Vec<Atom>) =
                atoms.into_iter().partition(|a| lambda_vars.iter().any(|v| a.mentions(v)));
            GuardedCell { variables: lambda_vars.to_vec(), constraints, param_guard: Formula::conj_atoms(guard) }
        })
        .collect()
}
