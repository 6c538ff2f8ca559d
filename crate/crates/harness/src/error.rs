use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: row {row}, column {col}: {message}")]
    Cell {
        path: PathBuf,
        row: usize,
        col: String,
        message: String,
    },
    #[error("{0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] fairkc::Error),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for an infeasible instance, 3 for everything
    /// else (bad input, IO, parse).
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Solver(e) if e.is_infeasible() => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
