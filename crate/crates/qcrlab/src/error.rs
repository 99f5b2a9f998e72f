use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("invalid input table {path}: {reason}")]
    Table { path: PathBuf, reason: String },

    #[error("numeric failure at {context}: {source}")]
    Numeric {
        context: String,
        #[source]
        source: qcrlab_core::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Wraps a model error. Parameter errors that slipped past config
    /// validation are still reported as config errors.
    pub fn numeric(context: impl Into<String>, source: qcrlab_core::Error) -> Self {
        match source {
            qcrlab_core::Error::InvalidParameter { name, reason } => {
                Self::Config(format!("{}: `{name}` {reason}", context.into()))
            }
            source => Self::Numeric {
                context: context.into(),
                source,
            },
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for bad input, 3 for numeric failures, 1 for IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Table { .. } => 2,
            Self::Numeric { .. } => 3,
            Self::Io { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
