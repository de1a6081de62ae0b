use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid parameters; the message carries the schema of the command.
    #[error("{0}")]
    Config(String),

    #[error("numerical invariant violated: {0}")]
    Numerical(String),

    #[error("output validation failed for {file}: {reason}")]
    Validation { file: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Validation { .. } => 3,
            CliError::Io { .. } | CliError::Csv { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<oqsl_core::Error> for CliError {
    fn from(e: oqsl_core::Error) -> Self {
        use oqsl_core::Error as E;
        match e {
            E::InvalidArgument(_)
            | E::Parse(_)
            | E::Io(_)
            | E::NotApplicable(_)
            | E::DimensionMismatch { .. }
            | E::NotSquare { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
