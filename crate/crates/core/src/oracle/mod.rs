//! Independent brute-force checks: residue-ring brackets for measures,
//! partial sums for weighted lattice sums, and exhaustive quantifier
//! evaluation on boxes.

mod brute;
mod truncated;

use std::fmt;

use thiserror::Error;

use crate::num::{format_rat, Rat};

pub use brute::{brute_force_qe, brute_force_qe_with_budget, Table, DEFAULT_BUDGET};
pub use truncated::{partial_sum, truncated_measure};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("generator {generator}: mass outside the valuation window with no tail bound")]
    WindowTooSmall { generator: usize },
    #[error("generator {generator}: sum diverges along direction {direction}")]
    Diverges { generator: usize, direction: usize },
    #[error("evaluation budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("{0}")]
    Input(String),
}

/// `lower <= μ <= upper`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bracket {
    pub lower: Rat,
    pub upper: Rat,
    pub depth: u32,
    pub valuation_window: u32,
}

impl Bracket {
    pub fn width(&self) -> Rat {
        &self.upper - &self.lower
    }

    pub fn contains(&self, q: &Rat) -> bool {
        &self.lower <= q && q <= &self.upper
    }
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", format_rat(&self.lower), format_rat(&self.upper))
    }
}
