use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

use output::CliError;

/// Quantum estimation of the hopping in a fermion chain with pair creation.
#[derive(Parser, Debug)]
#[command(name = "qcrit", version, about)]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true, env = "QCRIT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// TOML configuration; keys not given take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Main output file (overrides `out` in the config; stdout if neither is set).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Random seed (overrides `seed` in the config).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// QFI over a grid of sizes, fields and temperatures (CSV).
    QfiSweep(Common),
    /// Real-space SLD kernels (CSV) and their decay class (JSON).
    SldProfile(Common),
    /// Finite-size scaling fit (JSON) and pseudo-critical table (CSV).
    Scaling(Common),
    /// Monte Carlo estimation replicas (CSV) and CRB summary (JSON).
    Estimate(Common),
    /// Check the closed forms against exact diagonalization (JSON).
    Verify(Common),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::QfiSweep(c) => commands::sweep::run(&c),
        Command::SldProfile(c) => commands::profile::run(&c),
        Command::Scaling(c) => commands::scaling::run(&c),
        Command::Estimate(c) => commands::estimate::run(&c),
        Command::Verify(c) => commands::verify::run(&c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcrit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
