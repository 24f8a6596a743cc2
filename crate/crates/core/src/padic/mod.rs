//! p-adic valuations, box cells and their measures as exponential
//! polynomials in the parameters.

mod cell;
mod context;
mod exppoly;
mod sum;
mod zero;

use num_bigint::BigInt;
use thiserror::Error;

pub use cell::{cell_to_weighted_sum, BoxCell, CellSum, Coord, Weight};
pub use context::{mod_inverse, PAdicContext, Valuation};
pub use exppoly::{ExpPolynomial, ExpTerm};
pub use sum::sum_closed_form;
pub use zero::{exp_poly_is_zero, ZeroTest};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("p must be prime (got {0})")]
    NotPrime(BigInt),
    #[error("zero has no angular component")]
    ZeroInput,
    #[error("invalid input: {0}")]
    Input(String),
    #[error("sum diverges along `{0}`")]
    Diverges(String),
    #[error("point lies outside every guard")]
    OutOfDomain,
}
