use std::process::ExitCode;

use thiserror::Error;

/// CLI failure classes; each maps to a stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Data(_) => ExitCode::from(3),
            CliError::Numerical(_) => ExitCode::from(4),
        }
    }
}

impl From<oucpd::Error> for CliError {
    fn from(err: oucpd::Error) -> Self {
        use oucpd::Error as E;
        let msg = err.to_string();
        match err {
            E::InvalidParameter(_)
            | E::Infeasible { .. }
            | E::EnumerationCap { .. }
            | E::DimensionMismatch { .. }
            | E::BasisCheck(_) => CliError::Config(msg),
            E::InvalidData(_) | E::EmptySegment { .. } => CliError::Data(msg),
            E::SingularStatistics { .. }
            | E::LikelihoodIdentity { .. }
            | E::TooManyFailures { .. }
            | E::Numerical(_) => CliError::Numerical(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
