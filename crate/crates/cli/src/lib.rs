//! Library side of the `sparselb` command: configuration, file formats,
//! reports and the commands themselves.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 numeric guard
//! tripped (a certified bound or a duality check failed), 4 I/O error.

pub mod commands;
pub mod config;
pub mod io;
pub mod report;

pub use commands::{execute, run};
pub use config::{parse_config, Command, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(clap::Error),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric guard: {0}")]
    Numeric(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => e.exit_code(),
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<sparselb::Error> for CliError {
    fn from(e: sparselb::Error) -> Self {
        use sparselb::Error as E;
        match e {
            E::BoundViolated { .. } | E::NoConvergence { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
