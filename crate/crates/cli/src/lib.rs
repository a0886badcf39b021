//! Driver behind the `greenfut` binary.
//!
//! Exit codes: 0 success, 2 unreadable or unparsable program, 3 bad
//! configuration, 4 strategies disagree on the value, 5 exploration found
//! several outcomes, 6 exploration hit its state limit, 1 anything else.

pub mod args;
mod commands;
mod report;
pub mod settings;
pub mod trace;

use std::path::PathBuf;

use thiserror::Error;

use greenfut::EngineError;

pub use args::{Cli, Command};
pub use commands::execute;
pub use settings::{RunConfig, Settings};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Parse {
        path: PathBuf,
        source: greenfut::ParseError,
    },
    #[error("{0}")]
    Config(String),
    #[error("strategies disagree on the final value: {0}")]
    Divergence(String),
    #[error("exploration found {0} distinct outcomes")]
    MultipleOutcomes(usize),
    #[error("exploration exceeded the state limit of {0}")]
    StateLimit(usize),
    #[error("cannot write {what}: {source}")]
    Write {
        what: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Sim(#[from] greenfut::sim::SimError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Read { .. } | CliError::Parse { .. } => 2,
            CliError::Config(_) => 3,
            CliError::Divergence(_) => 4,
            CliError::MultipleOutcomes(_) => 5,
            CliError::StateLimit(_) | CliError::Engine(EngineError::StateLimit(_)) => 6,
            CliError::Write { .. } | CliError::Engine(_) | CliError::Sim(_) => 1,
        }
    }
}
