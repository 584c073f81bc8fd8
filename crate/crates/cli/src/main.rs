//! `zsg`: solve matrix games and LPs, benchmark Gibbs samplers, project costs.
//!
//! Exit codes: 0 success, 2 bad input or arguments, 3 solver diagnostic
//! (accuracy not certified, extraction check failed, sampler gave up).

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zsg_core::{Backend, Error};

#[derive(Debug, Parser)]
#[command(name = "zsg", version, about = "Sampling-based zero-sum game and LP solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a matrix game read from a dense or sparse matrix file.
    SolveGame {
        input: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        /// Report the exact value xᵀAy instead of a sampled estimate.
        #[arg(long)]
        exact_value: bool,
    },
    /// Solve a JSON standard-form LP by binary search over embedded games.
    SolveLp {
        input: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Compare Gibbs samplers against the exact distribution.
    GibbsBench {
        input: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Support size of the generated strategy (default: min(rows, 4)).
        #[arg(long)]
        support: Option<usize>,
        /// Total weight of the generated strategy.
        #[arg(long, default_value_t = 2.0)]
        mass: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Classical query counts and asymptotic quantum projections.
    CostModel {
        /// Matrix or JSON LP file; dimensions are read from it.
        input: Option<PathBuf>,
        #[arg(long, required_unless_present = "input")]
        rows: Option<usize>,
        #[arg(long, required_unless_present = "input")]
        cols: Option<usize>,
        /// Max nonzeros per row (default: cols).
        #[arg(long)]
        row_sparsity: Option<usize>,
        /// Max nonzeros per column (default: rows).
        #[arg(long)]
        col_sparsity: Option<usize>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScheduleArg {
    Anytime,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Dense,
    Sparse,
    Rejection,
    TwoRegime,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Dense => Backend::ExactDense,
            BackendArg::Sparse => Backend::SparseIncremental,
            BackendArg::Rejection => Backend::Rejection,
            BackendArg::TwoRegime => Backend::TwoRegime,
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "fixed")]
    schedule: ScheduleArg,
    #[arg(long, value_enum, default_value = "dense")]
    backend: BackendArg,
    /// Iteration cap; required with --schedule anytime.
    #[arg(long)]
    max_iterations: Option<u64>,
    /// Write line-delimited JSON trace records here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Iterations between trace records (default: 1% of the run).
    #[arg(long)]
    trace_every: Option<u64>,
    /// Include wall-clock time in the result (makes output non-reproducible).
    #[arg(long)]
    wall_time: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Result path (default: standard output).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum CliError {
    Input(String),
    Solver(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Solver(m) => write!(f, "solver diagnostic: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::EntryOutOfRange { .. }
            | Error::IndexOutOfRange { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidMatrix(_)
            | Error::InvalidParameter(_)
            | Error::InvalidWeight(_)
            | Error::TooLarge { .. }
            | Error::BackendStorageMismatch { .. } => CliError::Input(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ZSG_LOG", "warn")).init();
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zsg: {e}");
            ExitCode::from(e.code())
        }
    }
}
