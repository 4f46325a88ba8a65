// SPDX-License-Identifier: Apache-2.0

//! `spinbath`: runs one analysis of a configured chain and writes a JSON
//! report (CSV for `evolve`).
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical contract violated,
//! 3 internal error. `SPINBATH_THREADS` caps the worker pool.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinbath::Error;

#[derive(Debug, Parser)]
#[command(
    name = "spinbath",
    version,
    about = "XY spin chain coupled to thermal baths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Build,
    Evolve,
    Stationary,
    Entropy,
    DetailedBalance,
    LocalStates,
    RqiConverge,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Build => "build",
            CommandKind::Evolve => "evolve",
            CommandKind::Stationary => "stationary",
            CommandKind::Entropy => "entropy",
            CommandKind::DetailedBalance => "detailed-balance",
            CommandKind::LocalStates => "local-states",
            CommandKind::RqiConverge => "rqi-converge",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hamiltonian spectrum, jump operators and bath table.
    Build(Args),
    /// Time series of distance, relative entropy, positivity and trace drift.
    Evolve(Args),
    /// Stationary state, spectral gap and uniqueness certificate.
    Stationary(Args),
    /// Entropy production of the stationary state and random states.
    Entropy(Args),
    /// Detailed balance residuals at the reference state.
    DetailedBalance(Args),
    /// Single-site marginals of the stationary state.
    LocalStates(Args),
    /// Repeated-interaction convergence table.
    RqiConverge(Args),
}

#[derive(Debug, Clone, clap::Args)]
pub struct Args {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Report path; defaults to `analysis.output`, then stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Root seed, overriding `analysis.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Contract tolerance, overriding `analysis.tol`.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Write `wall_time_s` as null so reports are byte-identical across runs.
    #[arg(long)]
    pub omit_timing: bool,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Contract(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Contract(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Contract(m) => write!(f, "numerical contract violated: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let m = e.to_string();
        match e {
            Error::SiteOutOfRange { .. }
            | Error::InvalidBeta(_)
            | Error::InvalidModel(_)
            | Error::InvalidArgument(_)
            | Error::SizeGuard { .. }
            | Error::UnequalTemperatures
            | Error::UnsupportedSize(_)
            | Error::DegenerateGns(_) => CliError::Validation(m),
            Error::NotHermitian { .. }
            | Error::NegativeEigenvalue { .. }
            | Error::Singular { .. }
            | Error::NotDensityMatrix(_)
            | Error::NotFaithful { .. }
            | Error::EmptyKernel => CliError::Contract(m),
            Error::ShapeMismatch { .. } | Error::NotChainOperator { .. } | Error::Numerical(_) => {
                CliError::Internal(m)
            }
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SPINBATH_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Validation(format!(
            "SPINBATH_THREADS must be a positive integer, got {v:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn main() -> ExitCode {
    // clap's own usage-error code (2) would collide with the contract code
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (kind, args) = match cli.command {
        Command::Build(a) => (CommandKind::Build, a),
        Command::Evolve(a) => (CommandKind::Evolve, a),
        Command::Stationary(a) => (CommandKind::Stationary, a),
        Command::Entropy(a) => (CommandKind::Entropy, a),
        Command::DetailedBalance(a) => (CommandKind::DetailedBalance, a),
        Command::LocalStates(a) => (CommandKind::LocalStates, a),
        Command::RqiConverge(a) => (CommandKind::RqiConverge, a),
    };
    match configure_threads().and_then(|_| commands::run(kind, &args)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spinbath {}: {e}", kind.name());
            ExitCode::from(e.code())
        }
    }
}
