use std::path::PathBuf;
use thiserror::Error;

use lbra_core::ModelError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{0}")]
    Model(#[from] ModelError),

    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("plot: {0}")]
    Plot(String),
}

impl CliError {
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }

    /// 2 for bad input, 3 for an experiment that produced nothing to estimate.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(ModelError::Degenerate(_)) => 3,
            CliError::Config { .. } | CliError::Model(_) | CliError::Plot(_) => 2,
            CliError::Io { .. } => 1,
        }
    }
}
