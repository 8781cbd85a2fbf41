use thiserror::Error;

use crate::curvature::MetricVector;

/// Errors raised by the geometry, combinatorics and flow layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected} edge classes, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("not realizable: tetrahedron {tet} has a dihedral cosine outside (-1, 1)")]
    NotRealizable { tet: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient samples: need {needed}, have {have}")]
    InsufficientSamples { needed: usize, have: usize },

    #[error("singular Jacobian")]
    SingularJacobian,

    /// The damped Newton iteration could not decrease the residual. Carries
    /// the best iterate reached so callers can fall back to it.
    #[error("line search failed with residual {residual:e}")]
    LineSearch { metric: MetricVector, residual: f64 },

    #[error("flow diverged: {0}")]
    Diverged(String),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::SingularJacobian | Error::LineSearch { .. } | Error::Diverged(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
