use std::process::ExitCode;

use thiserror::Error;

/// Failure of a CLI run, classified by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or configuration (exit 1).
    #[error("{0}")]
    Usage(String),
    /// Unreadable or invalid data, calendar or artifact (exit 2).
    #[error("{0}")]
    Data(String),
    /// The model could not be fitted (exit 3).
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Infeasible(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
            CliError::Infeasible(_) => "infeasible",
        }
    }

    /// One-line JSON diagnostic for stderr.
    pub fn diagnostic(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }

    pub fn into_exit(self) -> ExitCode {
        ExitCode::from(self.exit_code())
    }
}

impl From<hwdims::Error> for CliError {
    fn from(e: hwdims::Error) -> Self {
        match e {
            hwdims::Error::InfeasibleFit { .. } | hwdims::Error::NoFeasiblePoint { .. } => {
                CliError::Infeasible(e.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
