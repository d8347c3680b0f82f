//! Command-line harness: runs configured experiments or the acceptance
//! suite and writes `results.csv` and `results.json`.

pub mod config;
pub mod dispatch;
pub mod error;
pub mod output;
pub mod suite;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use symlab_core::acceptance::Scale;

use crate::dispatch::{prepare, run_one};
use crate::error::CliError;
use crate::output::{print_summary, write_results, RunSummary};

#[derive(Debug, Parser)]
#[command(name = "symlab", version, about = "Seeded symmetry experiments with CSV/JSON results")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SuiteName {
    Quick,
    Full,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiments listed in a JSON config file.
    Run {
        config: PathBuf,
        /// Override a dotted config path, e.g. `experiments.0.trials=500`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Cap on worker threads.
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance grid.
    Suite {
        name: SuiteName,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn set_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        // Fails only if the pool already exists, as in repeated in-process calls.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn run(config: PathBuf, set: Vec<String>, threads: Option<usize>, out: Option<PathBuf>) -> Result<i32, CliError> {
    set_threads(threads)?;
    let cfg = config::load(&config, &set)?;
    let base = config.parent().map(PathBuf::from).unwrap_or_default();
    let prepared = cfg
        .experiments
        .iter()
        .enumerate()
        .map(|(i, e)| prepare(e, &base).map_err(|err| CliError::Config(format!("experiments[{i}] ({}): {err}", e.experiment.kind()))))
        .collect::<Result<Vec<_>, _>>()?;
    let results = cfg.experiments.iter().zip(&prepared).map(|(e, p)| run_one(e, p)).collect();
    let summary = RunSummary::new(results);
    let dir = out.or(cfg.output).unwrap_or_default();
    write_results(&dir, &summary)?;
    print_summary(&summary);
    Ok(summary.exit_code())
}

fn suite(name: SuiteName, out: PathBuf, threads: Option<usize>) -> Result<i32, CliError> {
    set_threads(threads)?;
    let scale = match name {
        SuiteName::Quick => Scale::Quick,
        SuiteName::Full => Scale::Full,
    };
    let summary = RunSummary::new(suite::run_suite(scale));
    write_results(&out, &summary)?;
    print_summary(&summary);
    Ok(summary.exit_code())
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Run { config, set, threads, out } => run(config, set, threads, out),
        Command::Suite { name, out, threads } => suite(name, out, threads),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("symlab: {e}");
            e.exit_code()
        }
    }
}
