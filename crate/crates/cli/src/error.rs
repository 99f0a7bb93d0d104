use std::path::{Path, PathBuf};

use ace_core::AceError;
use thiserror::Error;

/// Failures of a CLI command. Each maps to a fixed exit code and prints as a
/// single `error[kind]: ...` line.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("error[schema]: {0}")]
    Schema(String),

    #[error("error[io]: {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("error[data]: line {line}: {message}")]
    Data { line: u64, message: String },

    #[error("error[data]: {0}")]
    DataShape(String),

    #[error("error[weak-identification]: {0}")]
    WeakIdentification(AceError),

    #[error("error[estimation]: {0}")]
    Estimation(AceError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Io { .. } => 3,
            CliError::WeakIdentification(_) | CliError::Estimation(_) => 4,
            CliError::Data { .. } | CliError::DataShape(_) => 5,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<AceError> for CliError {
    fn from(e: AceError) -> Self {
        match e {
            AceError::WeakIdentification { .. } => CliError::WeakIdentification(e),
            AceError::InvalidArgument(msg) => CliError::Schema(msg),
            other => CliError::Estimation(other),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
