use std::fmt;

use monomvn::Error;

/// A failure tagged with the stage that produced it.
#[derive(Debug)]
pub enum CliError {
    Core { stage: String, source: Error },
    Usage(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 5,
            CliError::Core { source, .. } => match source {
                Error::Parse { .. }
                | Error::InconsistentRowWidth { .. }
                | Error::NonFiniteValue { .. }
                | Error::EmptyColumn { .. }
                | Error::DimensionMismatch(_) => 2,
                Error::NonMonotonePattern { .. } => 3,
                Error::RankDeficient { .. }
                | Error::DegenerateColumn { .. }
                | Error::NonPdCovariance
                | Error::ConvergenceFailure { .. }
                | Error::InsufficientAssets(_) => 4,
                Error::InvalidConfig(_) | Error::Io(_) => 5,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core { stage, source } => write!(f, "{stage}: {source}"),
            CliError::Usage(msg) => f.write_str(msg),
        }
    }
}

/// Attach a stage name to core errors.
pub trait Stage<T> {
    fn stage(self, stage: impl Into<String>) -> Result<T, CliError>;
}

impl<T> Stage<T> for monomvn::Result<T> {
    fn stage(self, stage: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core { stage: stage.into(), source })
    }
}

impl<T> Stage<T> for std::io::Result<T> {
    fn stage(self, stage: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|e| CliError::Core {
            stage: stage.into(),
            source: Error::Io(e),
        })
    }
}
