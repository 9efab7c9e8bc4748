//! Command-line front end for the Stein variational MPC benchmarks: TOML
//! experiment files, seeded single runs and batches, the kernel ablation, and
//! racing progress series. Everything the binary does is reachable from here
//! so it can be tested without spawning processes.

pub mod commands;
pub mod config;
pub mod output;

pub use config::{BatchSpec, ExperimentFile};
pub use output::ResultRecord;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    /// 2 for configuration problems, 3 for solver failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<svmpc::Error> for CliError {
    fn from(e: svmpc::Error) -> Self {
        match e {
            svmpc::Error::InvalidConfig { field, message } => CliError::Config(format!("{field}: {message}")),
            other => CliError::Solver(other.to_string()),
        }
    }
}
