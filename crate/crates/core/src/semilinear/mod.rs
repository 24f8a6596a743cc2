//! Conjunctive cells, elimination, rectilinear pieces and parametric counting.

pub mod elim;

pub use elim::{project, satisfiable, simplify_conj, sum_out, ElimError, Piece, Summand};
pub mod cells;

pub use cells::{disjoint_dnf, to_cells, GuardedCell};
pub mod rect;

pub use rect::{rectilinearize, RectError, RectilinearPiece};
pub mod count;
pub mod enumerate;

pub use count::{count_parametric, CountError, PiecewisePolynomial};
pub use enumerate::{enumerate_fiber, EnumerateError};
