//! Command-line front door: load inputs, dispatch to a track, emit
//! line-delimited structured records plus a human-readable summary.
//!
//! Exit codes: 0 success, 2 parse error, 3 precondition violation,
//! 4 not converged, 5 hypothesis violated.

mod inputs;
mod records;
mod tracks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::records::RecordSink;

#[derive(Parser)]
#[command(
    name = "phi",
    about = "Deterministic lifts, fixed-point iteration, spectral projection limits and the depletion model",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one track and write a structured report.
    Run(Box<RunArgs>),
    /// Show a seeded random single path next to the deterministic lifted
    /// set sequence of a set-valued map.
    DemoFlipflop(DemoArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Track {
    Lattice,
    Kernel,
    Spectral,
    Riesz,
    Oml,
    Depletion,
    Contraction,
}

impl Track {
    fn name(self) -> &'static str {
        match self {
            Track::Lattice => "lattice",
            Track::Kernel => "kernel",
            Track::Spectral => "spectral",
            Track::Riesz => "riesz",
            Track::Oml => "oml",
            Track::Depletion => "depletion",
            Track::Contraction => "contraction",
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Which track to run.
    #[arg(long, value_enum)]
    track: Track,
    /// Depletion config file (flat key-value).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Kernel file: `n` then n rows of n reals.
    #[arg(long)]
    kernel: Option<PathBuf>,
    /// Complex matrix file: `n` then n rows of `re+imj` tokens.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Set-valued map file: one `state: succ1 succ2 ...` line per state.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Basis file for the cutting projection Q (oml track): `n r` header.
    #[arg(long)]
    q_basis: Option<PathBuf>,
    /// Basis file for the seed projection P0 (oml track): `n r` header.
    #[arg(long)]
    p0_basis: Option<PathBuf>,
    /// Toy kernel parameter (kernel track shortcut instead of --kernel).
    #[arg(long)]
    p: Option<f64>,
    /// Spectral filter beta (spectral track), default 0.5.
    #[arg(long)]
    beta: Option<f64>,
    /// Contour center as a complex token (riesz track), default 1+0j.
    #[arg(long)]
    center: Option<String>,
    /// Contour radius (riesz track); one tenth of the spectral gap when absent.
    #[arg(long)]
    radius: Option<f64>,
    /// Contour quadrature nodes (riesz track), default 64.
    #[arg(long)]
    nodes: Option<usize>,
    /// Seed state index for the lattice track, default 0.
    #[arg(long)]
    start: Option<usize>,
    /// Contraction factor rho for the contraction track, in (0, 1].
    #[arg(long)]
    rho: Option<f64>,
    /// Shift vector for the contraction track, e.g. "1 0.5".
    #[arg(long)]
    shift: Option<String>,
    /// Start vector for the contraction track (zeros when absent).
    #[arg(long)]
    start_vec: Option<String>,
    /// Second start for the uniqueness check (unit offset when absent).
    #[arg(long)]
    start2: Option<String>,
    /// Step budget for the depletion track, default 2000.
    #[arg(long)]
    steps: Option<u64>,
    /// Absolute stabilization tolerance, default 1e-10.
    #[arg(long)]
    policy_tol: Option<f64>,
    /// Iteration budget, default 100000.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Seed for any randomized stream in the run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report file; structured records go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    /// Set-valued map file.
    #[arg(long)]
    map: PathBuf,
    /// Start state index.
    #[arg(long, default_value_t = 0)]
    start: usize,
    /// Seed for the sampled single path.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of steps to trace.
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Report file; structured records go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Anything a track can fail with, tagged for exit-code mapping.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input (exit 2).
    Parse(String),
    /// Violated precondition or invalid parameters (exit 3).
    Precondition(String),
    /// Iteration failed to stabilize (exit 4).
    NotConverged(String),
    /// A declared hypothesis was falsified by the run (exit 5).
    HypothesisViolated(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::NotConverged(_) => 4,
            CliError::HypothesisViolated(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Parse(m)
            | CliError::Precondition(m)
            | CliError::NotConverged(m)
            | CliError::HypothesisViolated(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run_command(*args),
        Command::DemoFlipflop(args) => tracks::demo_flipflop(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run_command(args: RunArgs) -> Result<(), CliError> {
    let mut sink = RecordSink::open(args.out.clone())?;
    sink.meta(args.track.name(), args.seed)?;
    match args.track {
        Track::Lattice => tracks::run_lattice(&args, &mut sink),
        Track::Kernel => tracks::run_kernel(&args, &mut sink),
        Track::Spectral => tracks::run_spectral(&args, &mut sink),
        Track::Riesz => tracks::run_riesz(&args, &mut sink),
        Track::Oml => tracks::run_oml(&args, &mut sink),
        Track::Depletion => tracks::run_depletion(&args, &mut sink),
        Track::Contraction => tracks::run_contraction(&args, &mut sink),
    }?;
    sink.finish()
}
