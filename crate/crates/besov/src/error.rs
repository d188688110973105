//! Crate-wide error type and result alias.

/// Errors surfaced by library operations.
///
/// The CLI maps these to exit codes: invalid input and violated
/// preconditions exit 2, numeric non-convergence and truncation-capacity
/// failures exit 3. A failed verification verdict is not an error; it is a
/// regular report with `verdict: fail` and exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Structural precondition violated (parameter ranges, hypothesis guards).
    #[error("constraint violation: {0}")]
    Constraint(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A series truncation cannot reach the requested relative tail bound.
    #[error(
        "truncation capacity exceeded at r = {r}: requested degree {requested}, required {required}"
    )]
    Truncation {
        requested: usize,
        required: usize,
        r: f64,
    },

    /// Cubature refinement exhausted without meeting the target tolerance.
    /// Carries the last value so callers can report partial results.
    #[error(
        "quadrature non-convergence: value {value:.9e}, est error {est_error:.3e}, target rel tol {rel_tol:.1e}"
    )]
    NonConvergence {
        value: f64,
        est_error: f64,
        rel_tol: f64,
    },

    /// The weighted measure backing a norm is not finite for these indices.
    #[error("measure condition violated: {0}")]
    MeasureCondition(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for CLI reporting.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. } | Error::Truncation { .. } => 3,
            _ => 2,
        }
    }
}
