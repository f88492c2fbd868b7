//! Scenario runner, CSV writers and the verification suite behind the
//! `commonbath` binary.

pub mod output;
pub mod runner;
pub mod scenario;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("cutoff too small: {0}")]
    Cutoff(String),
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verify(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Integration(_) => 3,
            CliError::Cutoff(_) => 4,
        }
    }
}

impl From<commonbath::Error> for CliError {
    fn from(e: commonbath::Error) -> Self {
        use commonbath::Error as E;
        match e {
            E::CutoffTooSmall { .. } => CliError::Cutoff(e.to_string()),
            E::IntegrationFailure { .. } | E::NegativeQ { .. } => CliError::Integration(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
