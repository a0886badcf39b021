use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "greenfut",
    version,
    about = "Run, compare and explore programs with frequency-scaled futures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one program under one strategy and report its metrics.
    Run {
        file: PathBuf,
        /// Scaling strategy name.
        #[arg(long)]
        strategy: Option<String>,
        /// `simulate` (virtual time, default) or `semantics` (bare reduction).
        #[arg(long)]
        mode: Option<String>,
        /// Thread choice in semantics mode: newest, round-robin or random.
        #[arg(long)]
        scheduler: Option<String>,
        #[command(flatten)]
        shared: SharedArgs,
    },
    /// Simulate one program under several strategies side by side.
    Compare {
        file: PathBuf,
        /// Comma-separated strategy names, at least two.
        #[arg(long)]
        strategies: Option<String>,
        #[command(flatten)]
        shared: SharedArgs,
    },
    /// Enumerate every interleaving and report the distinct outcomes.
    Explore {
        file: PathBuf,
        #[arg(long)]
        strategy: Option<String>,
        /// Give up after this many distinct states.
        #[arg(long)]
        state_limit: Option<String>,
        #[command(flatten)]
        shared: SharedArgs,
    },
}

/// Flags every subcommand understands. Values stay as text until they are
/// merged with the config file.
#[derive(Debug, Default, Args)]
pub struct SharedArgs {
    /// Flat `key = value` file; flags given here take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Frequencies in increasing order, e.g. `1,1.5,2,2.5`.
    #[arg(long)]
    pub ladder: Option<String>,
    /// 1-based index of the initial level.
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub kappa: Option<String>,
    /// Cycles per rule, e.g. `--cycles create=2 add=1 claim=1`.
    #[arg(long, num_args = 1..=3, value_name = "RULE=N")]
    pub cycles: Vec<String>,
    /// Time per frequency change.
    #[arg(long)]
    pub tau: Option<String>,
    /// Also charge energy for frequency changes.
    #[arg(long)]
    pub transition_energy: bool,
    /// `spin` or `block`.
    #[arg(long)]
    pub wait: Option<String>,
    /// `current` or `idle:P`.
    #[arg(long)]
    pub spin_power: Option<String>,
    /// Block penalty as `time,energy`.
    #[arg(long)]
    pub block_penalty: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Write a JSON Lines trace here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// `table` or `json`.
    #[arg(long)]
    pub format: Option<String>,
}
