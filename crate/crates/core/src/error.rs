use thiserror::Error;

/// Top-level error type for the solver library.
///
/// The CLI maps these onto exit codes: parse/dimension problems are exit 2,
/// assumption-violation diagnostics are exit 3, internal invariant failures
/// are exit 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("sufficiency assumption violated: {0}")]
    Sufficiency(String),

    #[error("feasibility assumption violated: no solution at theta = {0}")]
    Feasibility(String),

    #[error("internal invariant failure: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
