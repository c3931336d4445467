//! Quantum circuits with general measurements, classical channels and
//! execution schedules.
//!
//! A circuit is lowered in two steps: parallel bouts are merged into single
//! gates carrying tensor-product measurements ([`reduce::linearize`]), and the
//! resulting linear circuit is unfolded into a measurement tree
//! ([`reduce::tree_of_linear`]). Every computation path of the circuit maps
//! to exactly one branch of the tree with identical probability and output.
//!
//! On trees, [`tree_exec`] provides the cumulative-operator calculus and
//! [`analysis`] turns the input-independence results into numeric checks:
//! rank-one factorization of branch outputs, probability constancy over
//! probe inputs, the function-constancy criterion and isometry scaling.
//!
//! All arithmetic is dense double-precision complex linear algebra at desk
//! scale (total dimension up to a few dozen).

pub mod analysis;
pub mod circuit_ir;
mod error;
pub mod qlin;
pub mod reduce;
mod tol;
pub mod tree_exec;

pub use error::{Error, Result};
pub use tol::{ToleranceError, Tolerances, TOLERANCE_ENV};
