use std::io;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A token in a LIBSVM file could not be parsed.
    #[error("line {line}: cannot parse `{token}`: {reason}")]
    Parse {
        line: usize,
        token: String,
        reason: String,
    },
    /// A label other than -1, 0 or +1.
    #[error("line {line}: label {label} is not one of -1, 0, +1")]
    Label { line: usize, label: f64 },
    /// Structural problem in a LIBSVM line (ordering, bounds).
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    /// Mismatched dimensions between operands.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// Invalid argument for a numerical routine (non-finite input, t > n, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A non-finite value appeared inside an iterative routine.
    #[error("non-finite value in {context} at iteration {iteration}")]
    Numeric {
        context: &'static str,
        iteration: usize,
    },
    /// Invalid run or solver configuration.
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
