use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conformal_cli::{commands, Exit, Failure, Overrides, RunConfig};

/// Conformal maps from the unit disk onto trigonometric-polynomial domains.
#[derive(Parser)]
#[command(name = "conformap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit boundary coefficients to uniformly spaced samples
    FitBoundary {
        /// Samples as JSON ([[x, y], ...] or {"samples": ...}) or CSV (x,y)
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long = "out-dir", default_value = "out")]
        out_dir: PathBuf,
    },
    /// Solve for the boundary correspondence and repair folds
    Solve(RunArgs),
    /// Evaluate the map on a grid and along level lines
    Map(RunArgs),
    /// Check the map and correspondence invariants
    Verify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Solution file (default: <out-dir>/solution.json)
    #[arg(long)]
    solution: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, Failure> {
        let mut config = RunConfig::load(&self.config)?;
        config.apply(&self.overrides);
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<Exit, Failure> {
    match cli.command {
        Command::FitBoundary { samples, m, n, out_dir } => commands::fit_boundary(&samples, m, n, &out_dir),
        Command::Solve(args) => commands::solve(&args.config()?),
        Command::Map(args) => commands::map(&args.config()?, args.solution.as_deref()),
        Command::Verify(args) => commands::verify(&args.config()?, args.solution.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(exit) => ExitCode::from(exit.code()),
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit.code())
        }
    }
}
