use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("missing upstream artifact: {0}")]
    Missing(String),

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] axdse::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit status: 2 config, 3 missing upstream artifact, 4 invariant violation,
    /// 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use axdse::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Missing(_) => 3,
            CliError::Invariant(_) => 4,
            CliError::Core(e) => match e {
                E::Parameter(_) | E::LibraryConfig(_) | E::Spec(_) | E::DatasetMissing(_) => 2,
                E::SchemaMismatch { .. } | E::ObjectiveArity(..) | E::InvalidReference(_) => 4,
                _ => 1,
            },
            _ => 1,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
