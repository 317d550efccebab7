use std::io;

use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A query range does not satisfy `1 <= i <= j <= n`.
    #[error("invalid range [{i}, {j}] for array of length {n}")]
    Range { i: usize, j: usize, n: usize },

    /// A parameter is outside its documented domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A select query asked for more occurrences than exist.
    #[error("not found: {0}")]
    NotFound(String),

    /// Serialized or in-memory bits do not parse as the expected format.
    #[error("malformed encoding: {0}")]
    Format(String),

    /// A structure is internally inconsistent (bad counters, impossible
    /// insertion, oracle answers that contradict each other).
    #[error("corrupt structure: {0}")]
    Corruption(String),

    /// An enumeration would exceed its explicit budget.
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    /// Recovery from query answers failed (e.g. the input was not a
    /// Baxter permutation).
    #[error("recovery failed: {0}")]
    Recovery(String),

    /// A text input could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
