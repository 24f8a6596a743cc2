//! Exact computations with p-adic measures of Presburger-definable families.

pub mod linear;
pub mod num;
pub mod oracle;
pub mod padic;
pub mod poly;
pub mod presburger;
pub mod ring;
pub mod semilinear;

pub use linear::{LinearTerm, QAffine};
pub use presburger::{Atom, Formula};
