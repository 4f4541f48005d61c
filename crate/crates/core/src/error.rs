use thiserror::Error;

/// Crate-wide error type.
///
/// `Validation` covers rejected inputs and violated preconditions (CLI exit
/// code 2); `Solver` covers failures inside a solver backend (exit code 3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    /// Malformed instance/keyword text with 1-based line and column.
    #[error("parse error at line {line}, column {col}: {msg}")]
    Codec { line: usize, col: usize, msg: String },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }

    pub fn codec(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Codec { line, col, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
