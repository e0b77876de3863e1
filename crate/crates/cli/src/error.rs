use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] gcm_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: malformed volume: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("energy curve is flat: no motion detected")]
    Flat,
    #[error("frame-bound estimate is invalid (A <= 0)")]
    InvalidFrame,
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(_) => 2,
            CliError::Io { .. } | CliError::Format { .. } => 3,
            CliError::Flat => 4,
            CliError::InvalidFrame => 5,
        }
    }
}
