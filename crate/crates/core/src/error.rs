use thiserror::Error;

/// Errors raised by the algebra, rounding, repair and majorant routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Block counts or block sizes do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// An input object failed its validator (POVM, PVM, state, tolerances).
    #[error("validation failed: {0}")]
    Validation(String),
    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A numerical kernel failed (eigen/SVD non-convergence, degeneracy).
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// An iterative solver stopped without meeting its stopping rule.
    #[error("solver did not converge: {0}")]
    Solver(String),
    /// A generator or configuration parameter is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
