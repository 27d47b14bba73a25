use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid `{field}` at line {line}: {message}")]
    Validation {
        field: String,
        line: usize,
        message: String,
    },

    #[error("usage: {0}")]
    Usage(String),

    #[error("unknown figure `{0}` (expected fig1, fig2, figA1, figA2, figA3 or figA4)")]
    UnknownFigure(String),

    #[error(transparent)]
    Solver(#[from] ineq_core::Error),

    #[error("{count} counterexample(s) in {trials} trials")]
    Counterexamples { count: usize, trials: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl LabError {
    /// 2 config/usage, 3 solver, 4 sweep counterexample, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Parse { .. }
            | LabError::Validation { .. }
            | LabError::Usage(_)
            | LabError::UnknownFigure(_) => 2,
            LabError::Solver(_) => 3,
            LabError::Counterexamples { .. } => 4,
            LabError::Io { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
