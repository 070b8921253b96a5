use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the library.
///
/// Variants fall into two families, see [`Error::is_numerical`]: input
/// errors (bad shapes, malformed files, invalid parameters) and numerical
/// failures (singular cells, failed factorizations, non-finite values
/// arising during iteration).
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("non-finite increment at cell ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("singular implicit cell at coarse cell ({row}, {col}) for refinement level {lambda}: 1 - inc/4 vanishes")]
    SingularCell { row: usize, col: usize, lambda: u32 },

    #[error("gram entry ({row}, {col}): {source}")]
    Pair {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("non-finite objective at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True when the failure happened inside a numerical routine rather than
    /// while validating inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonFinite { .. }
            | Error::SingularCell { .. }
            | Error::Numerical(_)
            | Error::Diverged { .. } => true,
            Error::Pair { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
