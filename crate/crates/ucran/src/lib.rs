//! Std companion to `ucran-core`: TOML config files, CSV and text reports,
//! trace and run-record files, and a parallel sweep runner.

pub mod config;
pub mod record;
pub mod report;
pub mod sweep;

use std::path::PathBuf;

/// Failures of the command-line tools, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Config(#[from] config::ConfigError),
    #[error("{0}")]
    Runtime(#[from] ucran_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Usage(_) => 1,
            AppError::Runtime(_) => 2,
            AppError::Io { .. } => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }
}
