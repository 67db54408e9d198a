use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] quantscat_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{failures} branch(es) outside their family threshold")]
    ComparisonFailed { failures: usize },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        use quantscat_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::EmptyBranches) => 3,
            CliError::Core(E::DegenerateWeights(_)) => 4,
            CliError::Core(_) => 2,
            CliError::Io { .. } => 1,
            CliError::ComparisonFailed { .. } => 5,
        }
    }

    /// Extra guidance printed after the error line.
    pub fn hint(&self) -> Option<&'static str> {
        use quantscat_core::Error as E;
        match self {
            CliError::Core(E::EmptyBranches) => Some(
                "hint: every order needs |sin θ| < 1; increase the geometry length or shorten the characteristic length",
            ),
            CliError::Core(E::DegenerateWeights(_)) => Some(
                "hint: pass --weight-mode uniform",
            ),
            _ => None,
        }
    }
}
