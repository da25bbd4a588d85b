use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input file (non-integer token, wrong arity, bad float).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A precondition or invariant was violated.
    #[error("{0}")]
    Validation(String),

    /// The eigensolver ran out of iterations. Carries the best estimate so
    /// callers can decide whether the residual is good enough for them.
    #[error("eigensolver did not converge in {iters} iterations (best gap {gap:.6e}, residual {residual:.3e}, tol {tol:.3e})")]
    NonConvergence {
        gap: f64,
        residual: f64,
        iters: usize,
        tol: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
