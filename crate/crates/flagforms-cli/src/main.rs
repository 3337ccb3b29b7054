//! Command-line entry point: merge flags over an optional config file, run
//! the selected check suite, emit the report, and exit 0 iff every check
//! passed (1 on check failure, 2 on configuration or execution errors).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use flagforms_cli::config::{parse_config_file, ConfigError, PartialConfig};
use flagforms_cli::suites::{self, SuiteError};

/// Numeric checks for torus connection forms and intersection pairings on
/// unitary relation varieties and flag manifolds.
#[derive(Debug, Parser)]
#[command(name = "flagforms", version)]
struct Cli {
    /// Suite to run: basis, roots, connection-check, kks-check, pair,
    /// orbit-anchor, or verify-all.
    command: Option<String>,
    /// Unitary rank n.
    #[arg(long)]
    n: Option<usize>,
    /// Surface genus for relation-variety suites.
    #[arg(long)]
    g: Option<usize>,
    /// Comma-separated exponent multi-index, e.g. 2,1,0.
    #[arg(long)]
    alpha: Option<String>,
    /// Seed for all randomized draws.
    #[arg(long)]
    seed: Option<u64>,
    /// Normalization-constant mode: unit or volume:<float>:<w1,...,wn>.
    #[arg(long = "c1-mode", value_name = "MODE")]
    c1_mode: Option<String>,
    /// Tolerance override, NAME=VALUE; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Initial solver line-search step.
    #[arg(long)]
    step: Option<f64>,
    /// Solver iteration budget.
    #[arg(long)]
    budget: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: json or csv.
    #[arg(long)]
    format: Option<String>,
    /// Layer the flags over this key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error("cannot write report: {0}")]
    Write(std::io::Error),
}

fn partial_from_flags(cli: &Cli) -> Result<PartialConfig, ConfigError> {
    let mut partial = PartialConfig::default();
    if let Some(text) = &cli.command {
        partial.assign("command", text)?;
    }
    partial.n = cli.n;
    partial.g = cli.g;
    if let Some(text) = &cli.alpha {
        partial.assign("alpha", text)?;
    }
    partial.seed = cli.seed;
    if let Some(text) = &cli.c1_mode {
        partial.assign("c1-mode", text)?;
    }
    for entry in &cli.tol {
        let (name, value) = entry.split_once('=').ok_or_else(|| ConfigError::InvalidValue {
            key: "tol".to_string(),
            value: entry.clone(),
            reason: "expected NAME=VALUE".to_string(),
        })?;
        partial.assign(&format!("tol.{}", name.trim()), value.trim())?;
    }
    partial.step = cli.step;
    partial.budget = cli.budget;
    partial.out = cli.out.clone();
    if let Some(text) = &cli.format {
        partial.assign("format", text)?;
    }
    Ok(partial)
}

/// Runs the tool; the returned flag says whether every check passed.
fn execute(cli: &Cli) -> Result<bool, CliError> {
    let flags = partial_from_flags(cli)?;
    let file = match &cli.config {
        Some(path) => parse_config_file(path)?,
        None => PartialConfig::default(),
    };
    let config = flags.over(file).finalize()?;
    let report = suites::run(&config)?;
    let text = report.emit();
    match &config.out {
        Some(path) => std::fs::write(path, &text).map_err(CliError::Write)?,
        None => print!("{text}"),
    }
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
