//! Configuration-driven runs of the conserve benchmarks: single runs,
//! parameter sweeps, identity checks, convergence studies and reference
//! generation, all emitting CSV.

pub mod commands;
pub mod config;
pub mod output;

use conserve::bench::BenchError;
use conserve::SchemeError;
use thiserror::Error;

pub use commands::{cmd_convergence, cmd_make_reference, cmd_run, cmd_sweep, cmd_verify, VerifyRequest};
pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("{failed} of {laws} identity checks exceed the tolerance")]
    VerifyFailed { failed: usize, laws: usize },
}

impl From<conserve::GridError> for CliError {
    fn from(e: conserve::GridError) -> Self {
        CliError::Bench(e.into())
    }
}

impl CliError {
    /// Short machine-readable category for the error record.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Bench(BenchError::Solve { .. }) => "solver",
            CliError::Bench(_) => "benchmark",
            CliError::Scheme(_) => "scheme",
            CliError::VerifyFailed { .. } => "verify-failed",
        }
    }
}
