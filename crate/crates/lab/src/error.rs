use std::path::PathBuf;

use thiserror::Error;

use crate::config::Diagnostic;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid config: {}", join(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("{context}: {source}")]
    Numeric {
        context: String,
        #[source]
        source: cocycle_core::Error,
    },
    #[error("cannot read {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no output directory: pass --out or set output.dir")]
    NoOutputDir,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join(d: &[Diagnostic]) -> String {
    d.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl LabError {
    /// Tag written to `error.json`.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Invalid(_) => "validation",
            Self::Numeric { .. } => "numerical",
            Self::ReadConfig { .. } | Self::NoOutputDir | Self::Io(_) => "io",
            Self::Csv(_) | Self::Json(_) => "serialization",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Invalid(_) => 2,
            Self::Numeric { .. } => 3,
            _ => 1,
        }
    }
}

/// Attaches a context string to core errors.
pub trait Context<T> {
    fn context(self, what: impl Into<String>) -> Result<T, LabError>;
}

impl<T> Context<T> for cocycle_core::Result<T> {
    fn context(self, what: impl Into<String>) -> Result<T, LabError> {
        self.map_err(|source| LabError::Numeric { context: what.into(), source })
    }
}
