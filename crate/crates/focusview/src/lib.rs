//! File formats, episode runner, sweeps and statistical analysis around the
//! `focusview_core` simulator.

use std::path::Path;

pub mod analyze;
pub mod cli;
pub mod output;
pub mod runner;
pub mod schema;

/// Failure classes, each with its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("episode aborted: {0}")]
    Aborted(String),
    #[error("analysis error: {0}")]
    Analysis(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io { .. } => 2,
            Error::Aborted(_) => 3,
            Error::Analysis(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Aborted(_) => "aborted",
            Error::Analysis(_) => "analysis",
            Error::Io { .. } => "io",
        }
    }
}

impl From<schema::SchemaError> for Error {
    fn from(e: schema::SchemaError) -> Self {
        Error::Config(e.to_string())
    }
}
