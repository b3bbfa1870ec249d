use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, RslError>;

#[derive(Debug, Error)]
pub enum RslError {
    #[error("{path}:{line}: parse error: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("index {index} out of bounds for {len} nodes")]
    Bounds { index: usize, len: usize },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("selection error: {0}")]
    Selection(String),

    #[error("missing upstream artifact: {}", .0.display())]
    Dependency(PathBuf),

    #[error("corrupted snapshot: {0}")]
    Snapshot(String),

    #[error("self-consistency check failed: {0}")]
    Consistency(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RslError {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        RslError::Dimension(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        RslError::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RslError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            RslError::Config(_) => 2,
            RslError::Dependency(_) => 3,
            RslError::Parse { .. }
            | RslError::Bounds { .. }
            | RslError::Validation(_)
            | RslError::Snapshot(_)
            | RslError::Consistency(_)
            | RslError::Io { .. } => 4,
            RslError::Numerical(_) => 5,
            RslError::Dimension(_)
            | RslError::Split(_)
            | RslError::Metric(_)
            | RslError::Selection(_) => 6,
        }
    }
}
