use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad or inconsistent configuration, detected before any report is written.
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Core(#[from] metric_lab::Error),
    /// Checks ran to completion but some reports failed.
    #[error("{0}")]
    Violations(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Violations(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub type CliResult<T> = std::result::Result<T, CliError>;
