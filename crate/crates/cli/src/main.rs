//! `blockmerge`: exact tables, distributions and simulations of the block-merge process.

mod commands;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{
    CltArgs, ExactArgs, MomentsArgs, PmfArgs, RecurrenceArgs, ReplayArgs, SimulateArgs,
};
use output::{Format, Sink};

#[derive(Parser)]
#[command(name = "blockmerge", version, about = "Block-merge shuffling: exact analysis and simulation")]
struct Cli {
    /// Worker threads for independent jobs.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Output directory. Results go to stdout when unset.
    #[arg(long, global = true, env = "BLOCKMERGE_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check exact identities of the block-count law.
    Exact(ExactArgs),
    /// Raw and central moments of X_n.
    Moments(MomentsArgs),
    /// Truncated probability mass function of X_n.
    Pmf(PmfArgs),
    /// Monte Carlo summary of X_n.
    Simulate(SimulateArgs),
    /// Normal-approximation diagnostics from a simulation.
    Clt(CltArgs),
    /// Solve the generic first-step recurrence for a given forcing.
    Recurrence(RecurrenceArgs),
    /// Regenerate an artifact from its manifest.
    Replay(ReplayArgs),
}

/// Exit status classes.
pub enum Failure {
    /// Bad flags or inputs: exit 2.
    Usage(String),
    /// A check failed or the run could not complete: exit 1.
    Check(String),
}

impl From<blockmerge::Error> for Failure {
    fn from(e: blockmerge::Error) -> Self {
        match e {
            blockmerge::Error::InvalidInput(_)
            | blockmerge::Error::InvalidPermutation { .. }
            | blockmerge::Error::TruncationTooShort { .. } => Failure::Usage(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Check(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs == 0 {
        eprintln!("error: --jobs must be positive");
        return ExitCode::from(2);
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let sink = Sink { dir: cli.out, format: cli.format };
    let result = match cli.command {
        Command::Exact(a) => commands::exact(&a, &sink, None),
        Command::Moments(a) => commands::moments(&a, &sink, None),
        Command::Pmf(a) => commands::pmf(&a, &sink, None),
        Command::Simulate(a) => commands::simulate(&a, &sink, None),
        Command::Clt(a) => commands::clt(&a, &sink, None),
        Command::Recurrence(a) => commands::recurrence(&a, &sink, None),
        Command::Replay(a) => commands::replay(&a, &sink),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
