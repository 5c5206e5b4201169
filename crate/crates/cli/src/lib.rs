//! Command-line front end: ledger export, verification suites, the harmonic
//! 1-form certificate and the admissible-δ search.

pub mod config;
pub mod run;

pub use config::{parse_config, Command, Format, RunConfig, OUTPUT_DIR_ENV};
pub use run::{run, Outcome, EXIT_ERROR, EXIT_GATING_FAILURE, EXIT_PASS};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error(transparent)]
    Core(#[from] t3_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Usage(_) => "usage",
            CliError::Core(_) => "module",
            CliError::Io(_) => "io",
            CliError::Json(_) => "json",
            CliError::Csv(_) => "csv",
        }
    }
}
