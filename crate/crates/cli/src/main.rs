//! `disagg`: generate synthetic household data, disaggregate an aggregate
//! power series into per-channel predictions, and score the results.

mod commands;
mod config;
mod csv_io;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "disagg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the metric dilation radius.
    #[arg(long)]
    radius: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic household (aggregate plus ground truth) as CSV.
    Generate(CommonArgs),
    /// Run the solver on aggregate.csv and write per-channel predictions.
    Disaggregate(CommonArgs),
    /// Score predictions against ground truth and write report.csv.
    Evaluate(CommonArgs),
    /// Print a configuration file; defaults when --config is omitted.
    PrintConfig {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(radius) = args.radius {
        config.radius = radius;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(args) => commands::cmd_generate(&load(&args)?),
        Command::Disaggregate(args) => commands::cmd_disaggregate(&load(&args)?),
        Command::Evaluate(args) => commands::cmd_evaluate(&load(&args)?).map(|_| ()),
        Command::PrintConfig { config } => {
            match config {
                Some(path) => {
                    let loaded = RunConfig::load(&path)?;
                    print!(
                        "{}",
                        toml::to_string_pretty(&loaded)
                            .map_err(|e| error::usage(e.to_string()))?
                    );
                }
                None => print!("{}", RunConfig::default_toml()),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
