//! Formal combinations of box cells, their ring operations, normalization
//! to basic form and equality through measure functions.

mod certificate;
mod document;
mod measure;
mod normalize;
mod presentation;
pub mod rules;

pub use certificate::{verify_certificate, Certificate, CertificateError, Rule, Step, ALL_RULES};
pub use document::{
    certificate_from_json, certificate_to_json, presentation_from_json, presentation_to_json, DocumentError,
};
pub use measure::{cell_measure, decide_equal, measure_function, Equality, MeasureCache, MeasureFunction};
pub use normalize::{normalize_to_basic, BasicPresentation, Normalized};
pub use presentation::{
    coefficient_denominator, default_lambda_vars, explicit_weight, fiber_product, Generator, Presentation, RingError,
};
