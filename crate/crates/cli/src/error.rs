use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// A verified property failed.
    #[error("property violation: {0}")]
    Violation(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid instance: {0}")]
    Instance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Violation(_) => 1,
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Instance(_) => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<srrb::Error> for CliError {
    fn from(e: srrb::Error) -> Self {
        use srrb::Error::*;
        match e {
            InvalidCurve(_) | InvalidLaw(_) | InvalidInstance(_) | NonUniqueOptimum(..) => CliError::Instance(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
