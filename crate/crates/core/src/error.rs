use thiserror::Error;

use crate::moments::ParamRegime;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    Dimension(String),

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("malformed index set: {0}")]
    MalformedIndexSet(String),

    #[error("operation requires {expected} pencil variable pair(s), pencil has n = {actual}")]
    UnsupportedVariables { expected: usize, actual: usize },

    #[error("base matrix is not centrohermitian (residual {residual:e})")]
    NotCentrohermitian { residual: f64 },

    #[error("parameter relation violated: {0}")]
    RelationViolated(String),

    #[error("conjugation symmetry violated (residual {residual:e})")]
    SymmetryViolated { residual: f64 },

    #[error("recurrence depth {available} is insufficient, need {needed}")]
    InsufficientDepth { needed: usize, available: usize },

    #[error("Gram matrix H_{degree} is not positive definite")]
    NotPositiveDefinite { degree: usize },

    #[error("parameters are in the {regime} regime; cubature refused{}", first_failure.map(|n| format!(" (H_{n} not positive definite)")).unwrap_or_default())]
    RegimeRefused {
        regime: ParamRegime,
        first_failure: Option<usize>,
    },

    #[error("Jacobi matrices do not commute (scaled commutator {commutator:e})")]
    NonCommuting { commutator: f64 },

    #[error("joint eigenvector residual {residual:e} exceeds tolerance {tol:e}")]
    JointResidual { residual: f64, tol: f64 },

    #[error("eigenvector has zero first component")]
    ZeroFirstComponent,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
