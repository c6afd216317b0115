use std::path::PathBuf;

use crate::model::EnvKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("environment mismatch: {left:?} vs {right:?}")]
    EnvMismatch { left: EnvKind, right: EnvKind },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("could not sample a feasible instance #{index} after {retries} retries: {reason}")]
    Sampling {
        index: usize,
        retries: usize,
        reason: String,
    },

    #[error("infeasible: {0}")]
    Infeasible(#[from] crate::env::Infeasible),

    #[error("empty log")]
    EmptyLog,

    #[error("resource parse error at line {line}: {message}")]
    Resource { line: usize, message: String },

    #[error("config hash mismatch for {path}: expected {expected}, found {found}")]
    StaleArtifact {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("missing artifact: {0}")]
    MissingArtifact(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input (config, paths, artifacts).
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidArgument(_)
                | Error::StaleArtifact { .. }
                | Error::MissingArtifact(_)
                | Error::EnvMismatch { .. }
                | Error::Io { .. }
                | Error::Json(_)
        )
    }
}
