//! Dense complex linear algebra over named tensor-product spaces: matrices,
//! kets, unnormalized density operators, general measurements, partial
//! traces and operator lifting.

pub mod gates;
mod matrix;
mod measurement;
pub mod random;
mod space;
mod state;

pub use matrix::{complex_vec, proportional, tensor_product, ComplexMatrix};
pub use measurement::{tensor_measurements, tuple_label, Measurement, TUPLE_SEPARATOR};
pub use space::{lift_operator, partial_trace_matrix, permute_matrix, permute_vector, Factor, HilbertSpec};
pub use state::{
    apply_kraus, apply_kraus_post, is_pure, outcome_probability, partial_trace, DensityOperator, Ket,
    PostState,
};

pub(crate) use state::clamp_probability;

/// Complex scalar.
pub type C64 = nalgebra::Complex<f64>;
