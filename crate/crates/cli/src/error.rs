use std::path::PathBuf;

/// Failures of a CLI command, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid or incomplete configuration; exit code 2.
    #[error("{0}")]
    Config(levy_spectra::Error),
    /// `report` found nothing to summarize; exit code 3.
    #[error("no campaign artifacts in {}", .0.display())]
    NoArtifacts(PathBuf),
    /// Computations finished but a validation check failed; exit code 4.
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Artifact { path: PathBuf, message: String },
    #[error(transparent)]
    Compute(#[from] levy_spectra::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::NoArtifacts(_) => 3,
            CliError::Validation(_) => 4,
            CliError::Io { .. } | CliError::Artifact { .. } | CliError::Compute(_) => 1,
        }
    }

    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config(levy_spectra::Error::config(field, message))
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
