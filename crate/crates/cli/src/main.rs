//! `regcal`: simulate, train, estimate, evaluate, select and benchmark from
//! the command line.
//!
//! Exit codes: 0 on success, 2 for configuration or input errors, 3 when a
//! simulator fails at run time.

mod commands;
mod config;
mod external;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Failure;
use config::{parse_pairs, split_pair, RunConfig};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (schema_version 1)");

#[derive(Parser)]
#[command(name = "regcal", version = VERSION, about = "Calibrate simulators by regressing parameters on summary statistics")]
struct Cli {
    /// Worker threads for simulation and fitting (default: one per core).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Run configuration file (`key = value` lines).
    #[arg(short, long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override one configuration key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write `train.csv` and `test.csv` experiment tables.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Fit one elastic-net regression per parameter.
    Train {
        #[command(flatten)]
        config: ConfigArgs,
        /// Training table [default: <output>/train.csv].
        #[arg(long)]
        table: Option<PathBuf>,
        /// Estimator artifact [default: <output>/estimator.json].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate parameters from a one-row CSV of observed statistics.
    Estimate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Estimator artifact [default: <output>/estimator.json].
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        observed: PathBuf,
    },
    /// Score an estimator on a held-out table.
    Evaluate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Estimator artifact [default: <output>/estimator.json].
        #[arg(long)]
        model: Option<PathBuf>,
        /// Test table [default: <output>/test.csv].
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Train and score a classifier that picks the generating model.
    Select {
        #[command(flatten)]
        config: ConfigArgs,
        /// Labeled training table; simulated from `candidates` when absent.
        #[arg(long, requires = "test")]
        train: Option<PathBuf>,
        /// Labeled test table.
        #[arg(long, requires = "train")]
        test: Option<PathBuf>,
    },
    /// Compare the regression method with the ABC and distance baselines.
    Benchmark {
        #[command(flatten)]
        config: ConfigArgs,
        /// straight, broken, selection, surrogate or curvature.
        #[arg(long)]
        preset: Option<String>,
    },
}

fn load_config(args: &ConfigArgs) -> Result<RunConfig, Failure> {
    let mut pairs = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            parse_pairs(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => Default::default(),
    };
    for o in &args.overrides {
        let (key, value) = split_pair(o).map_err(|e| Failure::Usage(format!("--set: {e}")))?;
        pairs.insert(key, value);
    }
    RunConfig::from_pairs(&pairs).map_err(|e| Failure::Usage(format!("config: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Usage(format!("--jobs: {e}")))?;
    }
    match cli.command {
        Command::Simulate { config } => commands::simulate(&load_config(&config)?),
        Command::Train { config, table, out } => commands::train(&load_config(&config)?, table, out),
        Command::Estimate { config, model, observed } => {
            commands::estimate(&load_config(&config)?, model, &observed)
        }
        Command::Evaluate { config, model, table } => commands::evaluate(&load_config(&config)?, model, table),
        Command::Select { config, train, test } => commands::select(&load_config(&config)?, train, test),
        Command::Benchmark { config, preset } => commands::benchmark(&load_config(&config)?, preset),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_names_the_schema() {
        assert!(VERSION.ends_with(&format!("(schema_version {})", regcal::SCHEMA_VERSION)));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
