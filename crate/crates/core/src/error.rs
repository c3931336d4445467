use thiserror::Error;

use crate::circuit_ir::Violation;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("malformed matrix: {0}")]
    Malformed(String),

    #[error("unknown wire `{0}`")]
    UnknownWire(String),

    #[error("duplicate wire `{0}`")]
    DuplicateWire(String),

    #[error("wire `{0}` has invalid dimension {1}")]
    InvalidDimension(String, usize),

    #[error("operator is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("trace {0:e} is not positive")]
    ZeroTrace(f64),

    #[error("measurement has no outcomes")]
    EmptyMeasurement,

    #[error("measurement is not complete (residual {0:e})")]
    IncompleteMeasurement(f64),

    #[error("duplicate outcome label `{0}`")]
    DuplicateLabel(String),

    #[error("outcome label `{0}` contains the tuple separator `|`")]
    LabelSeparator(String),

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("incoherent path at gate `{gate}`: {reason}")]
    IncoherentPath { gate: String, reason: String },

    #[error("circuit is invalid ({} violation(s); first: {})", .0.len(), .0.first().map(|v| v.message.as_str()).unwrap_or(""))]
    InvalidCircuit(Vec<Violation>),

    #[error("schedule is not linear: bout {0} has {1} gates")]
    NonLinearSchedule(usize, usize),

    #[error("invalid measurement tree: {0}")]
    InvalidTree(String),

    #[error("route `{0}` is not a branch of the tree")]
    NotABranch(String),

    #[error("wire roles (principal/ancilla) are missing")]
    MissingWireRoles,

    #[error("linear map has rank {0}, at least 2 is required")]
    RankTooLow(usize),

    #[error("path `{0}` is malformed")]
    BadPathSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
