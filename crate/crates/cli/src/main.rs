mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crate::commands::Context;
use crate::error::CliError;
use crate::output::OutDir;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    CellSolve,
    Bands,
    GermCheck,
    Solve,
    Verify,
    Report,
}

/// Homogenization experiments for periodic operators b(D)* g(x/eps) b(D).
#[derive(Debug, Parser)]
#[command(name = "hihom", version)]
struct Args {
    command: Command,
    /// Problem description (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's "output" entry or ./out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides the truncation order N of the config.
    #[arg(long)]
    truncation: Option<usize>,
    #[arg(long)]
    quiet: bool,
}

fn run(args: &Args) -> Result<(), CliError> {
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size worker pool: {e}")))?;
    }
    let config = config::load(&args.config)?;
    let problem = config.problem()?;
    let order = args.truncation.unwrap_or(config.truncation);
    let dir = args
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let ctx = Context { out: OutDir::new(dir, args.quiet)?, config, problem, order };
    match args.command {
        Command::CellSolve => commands::cell_solve(&ctx),
        Command::Bands => commands::bands(&ctx),
        Command::GermCheck => commands::germ_check(&ctx),
        Command::Solve => commands::solve(&ctx),
        Command::Verify => commands::verify(&ctx),
        Command::Report => commands::report(&ctx),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hihom: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
