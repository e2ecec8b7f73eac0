use thiserror::Error;

use topoloc::error::Error as CoreError;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad or infeasible configuration, caught before any result is written.
    #[error("config error: {0}")]
    Config(String),

    /// A checked invariant failed during the computation.
    #[error("invariant failure: {0}")]
    Invariant(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) | CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }
}

/// Setup and request errors are configuration problems; anything raised
/// mid-computation counts as an invariant failure.
impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let mut root = &e;
        while let CoreError::AtField { source, .. } = root {
            root = source;
        }
        match root {
            CoreError::Parse { .. }
            | CoreError::InvalidLattice(_)
            | CoreError::InvalidLoop(_)
            | CoreError::InvalidRegion(_)
            | CoreError::InvalidSetup(_)
            | CoreError::UnknownEstimator(_)
            | CoreError::LimitExceeded { .. }
            | CoreError::DimensionOverflow { .. }
            | CoreError::QubitOutOfRange { .. } => CliError::Config(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}
