//! Experiment configuration and the commands behind the `decipher-fst`
//! binary.

pub mod commands;
pub mod config;
pub mod pipeline;

use std::path::PathBuf;

use clap::Parser;

pub use commands::{read_manifest, run_command, Command, EvalReport, Manifest, StepRecord};
pub use config::ExperimentConfig;

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "decipher-fst", version, about = "Unsupervised phone-to-grapheme decipherment")]
pub struct Cli {
    /// Pipeline step to run.
    #[arg(value_enum)]
    pub command: Command,
    /// Experiment config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Worker threads; all cores by default.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Read and check every input without writing anything.
    #[arg(long)]
    pub validate: bool,
}

/// Runs one parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_command(&cfg, cli.command, cli.validate))
}
