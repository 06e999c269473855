use std::path::PathBuf;

use thiserror::Error;

pub type BenchResult<T> = std::result::Result<T, BenchError>;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid experiment spec: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] semiriem::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("duplicate output path {0}")]
    DuplicateOutput(PathBuf),
    #[error("nothing to plot")]
    EmptyPlot,
    #[error("traces mix experiments {0} and {1}")]
    MixedExperiments(String, String),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_)
            | BenchError::Json { .. }
            | BenchError::DuplicateOutput(_)
            | BenchError::EmptyPlot
            | BenchError::MixedExperiments(..) => EXIT_USAGE,
            BenchError::Core(_) | BenchError::Io { .. } => EXIT_INTERNAL,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io { path: path.into(), source }
    }
}
