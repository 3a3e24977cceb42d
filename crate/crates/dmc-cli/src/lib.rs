//! Generators, flat-text configuration, the verification suite and the
//! benchmark driver behind the `detmincut` binary.

pub mod bench;
pub mod config;
pub mod generate;
pub mod suite;

use dmc_graph::GraphError;
use dmc_pipeline::PipelineError;

pub use bench::{bench, write_bench_csv, BenchRow};
pub use config::{Config, Fault};
pub use generate::{generate, Family, InstanceSpec};
pub use suite::{run_graph, run_instance, run_suite, Check, RunReport};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status when a verification check fails.
pub const EXIT_VERIFY: i32 = 1;
/// Exit status for usage and parameter errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) | CliError::Pipeline(PipelineError::Verification(_)) => EXIT_VERIFY,
            _ => EXIT_USAGE,
        }
    }
}
