//! `coulombgas`: experiment driver for the planar Coulomb gas.
//!
//! Exit codes: 0 pass, 1 check failure or runtime error, 2 usage error,
//! 3 numerical blow-up.

mod cir;
mod marginals;
mod output;
mod settings;
mod simulate;
mod verify;

use std::io::Write;
use std::process::ExitCode;

use chrono::Utc;
use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::output::OutputDir;
use crate::settings::{CommonArgs, Defaults, Settings};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] coulombgas::Error),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use coulombgas::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::InvalidParam(_) | E::SizeMismatch { .. }) => 2,
            CliError::Core(E::BlowUp { .. } | E::NonFinite { .. }) => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "coulombgas", version, about = "Planar Coulomb gas simulation and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an ensemble of particle paths and record H_V, H_W and the minimum gap.
    #[command(allow_negative_numbers = true)]
    Simulate(CommonArgs),
    /// Compare Euler and exact CIR samples with the mean, the Gamma law and the W1 contraction.
    #[command(allow_negative_numbers = true)]
    Cir(CommonArgs),
    /// Tabulate one- and two-point marginal densities, Delta_N and r_N.
    #[command(allow_negative_numbers = true)]
    Marginals(CommonArgs),
    /// Run the verification suite; exit 0 iff every check passes.
    #[command(allow_negative_numbers = true)]
    Verify(CommonArgs),
}

/// Result of a subcommand: a JSON summary and whether its checks passed.
pub struct Outcome {
    pub summary: serde_json::Value,
    pub failures: Vec<String>,
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("COULOMBGAS_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("COULOMBGAS_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    init_threads()?;
    let started = Utc::now();
    let (name, args, defaults): (&str, &CommonArgs, Defaults) = match &cli.command {
        Command::Simulate(a) => ("simulate", a, simulate::DEFAULTS),
        Command::Cir(a) => ("cir", a, cir::DEFAULTS),
        Command::Marginals(a) => ("marginals", a, marginals::DEFAULTS),
        Command::Verify(a) => ("verify", a, verify::DEFAULTS),
    };
    let settings = Settings::resolve(args, &defaults)?;
    let mut out = settings.out_dir().map(OutputDir::create).transpose()?;
    let outcome = match name {
        "simulate" => simulate::run(&settings, out.as_mut())?,
        "cir" => cir::run(&settings, out.as_mut())?,
        "marginals" => marginals::run(&settings, out.as_mut())?,
        _ => verify::run(&settings, out.as_mut())?,
    };
    if let Some(dir) = out {
        dir.finish(name, &settings, started)?;
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.summary).unwrap_or_default();
            // A closed pipe (e.g. `| head`) is not an error.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if outcome.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &outcome.failures {
                    eprintln!("FAILED {f}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
