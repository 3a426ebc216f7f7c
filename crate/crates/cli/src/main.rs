//! Batch front-end for hybrid-ward design: solve thresholds and allocations,
//! sweep parameters into CSV, run policy simulations, and fit model
//! parameters from episode data.
//!
//! Exit codes: 0 success, 1 invalid input, 2 infeasible instance,
//! 3 identifiability failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "hybridward", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format where a choice exists (sweep only).
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Override the configured random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal call-in threshold(s) for one instance, as JSON.
    Solve(Common),
    /// Solve along a grid of one variable (T, C, Gamma, or x), as CSV.
    Sweep(Common),
    /// Monte Carlo run of the ward under one or both swap policies.
    Simulate(Common),
    /// Fit model parameters from an episode CSV.
    Estimate(Common),
}

fn run(cli: Cli) -> commands::CmdResult {
    let common = match &cli.command {
        Command::Solve(c) | Command::Sweep(c) | Command::Simulate(c) | Command::Estimate(c) => c,
    };
    if let Some(n) = common.threads {
        // Ignore failure: the global pool may already exist (tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = common.out.as_deref();
    match &cli.command {
        Command::Solve(c) => {
            if c.format.as_deref() == Some("csv") {
                return Err(commands::CmdError::Invalid("solve emits JSON".into()));
            }
            commands::cmd_solve(config::load(&c.config)?, out)
        }
        Command::Sweep(c) => {
            let json = c.format.as_deref() == Some("json");
            commands::cmd_sweep(config::load(&c.config)?, out, json)
        }
        Command::Simulate(c) => {
            if c.format.as_deref() == Some("csv") {
                return Err(commands::CmdError::Invalid(
                    "simulate emits JSON (plus CSV side files)".into(),
                ));
            }
            commands::cmd_simulate(config::load(&c.config)?, out, c.seed)
        }
        Command::Estimate(c) => {
            if c.format.as_deref() == Some("csv") {
                return Err(commands::CmdError::Invalid("estimate emits JSON".into()));
            }
            let dir = c.config.parent().unwrap_or(std::path::Path::new(".")).to_path_buf();
            commands::cmd_estimate(config::load(&c.config)?, &dir, out, c.seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
