//! Command-line front end.
//!
//! Four subcommands: `sample` surveys the random ensemble, `figure` rebuilds
//! the data behind one of the seven survey figures, `eval` reports every
//! measure for one state file, `families` tabulates a named family curve.
//! Exit codes are a stable contract: 0 success, 1 usage, 2 I/O, 3 invalid
//! state.

mod commands;
mod config;
mod figures;
mod manifest;
mod plots;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    State(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::State(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::State(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qcorr",
    version,
    about = "Monte Carlo surveys of two-qubit quantum correlations",
    disable_help_subcommand = true
)]
struct Cli {
    /// Flat `key = value` file supplying defaults; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Survey the random mixed-state ensemble, one CSV row per sample
    Sample(SampleArgs),
    /// Rebuild the data and plot script behind one survey figure (1-7)
    Figure(FigureArgs),
    /// Evaluate every measure for a single state read from a file
    Eval(EvalArgs),
    /// Tabulate a named one-parameter family through the measure pipeline
    Families(FamiliesArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Samples to draw [default: 100000]
    #[arg(long)]
    n: Option<u64>,

    /// Campaign seed [default: 42]
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads, 0 means one per core [default: 0]
    #[arg(long)]
    workers: Option<usize>,

    /// Also run the measurement optimizer for the discord and cc columns
    #[arg(long)]
    with_discord: bool,

    /// Output CSV path [default: samples.csv]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    /// Figure number
    #[arg(value_parser = clap::value_parser!(u8).range(1..=7))]
    number: u8,

    /// Sample count [default: per figure]
    #[arg(long)]
    n: Option<u64>,

    /// Campaign seed [default: 42]
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads, 0 means one per core [default: 0]
    #[arg(long)]
    workers: Option<usize>,

    /// Histogram and R-axis bin count [default: 100]
    #[arg(long)]
    bins: Option<usize>,

    /// Half-width of the fixed-R acceptance band, figure 2 only [default: 0.02]
    #[arg(long)]
    r_band: Option<f64>,

    /// Comma-separated fixed-R targets, figure 2 only
    /// [default: 1,1.3,1.6,2,2.3,2.6,3,3.3,3.8]
    #[arg(long)]
    grid: Option<String>,

    /// Tabulate the analytic pure-state density overlay, figure 2 only
    #[arg(long)]
    pure_analytic: bool,

    /// Output directory [default: .]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// State file: 16 `re im` lines, row-major computational basis
    state: PathBuf,

    /// Emit one machine-readable CSV row instead of name = value lines
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct FamiliesArgs {
    /// Family name: werner, mems, mnms, schmidt, or bell-diagonal
    family: String,

    /// Sweep start [default: family domain start]
    #[arg(long)]
    from: Option<f64>,

    /// Sweep end [default: family domain end]
    #[arg(long)]
    to: Option<f64>,

    /// Grid points, endpoints included [default: 101]
    #[arg(long)]
    steps: Option<usize>,

    /// Fill the discord and cc columns via the optimizer
    #[arg(long)]
    with_discord: bool,

    /// Output CSV path [default: <family>.csv]
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    let result = config::Config::load(cli.config.as_deref()).and_then(|cfg| match &cli.command {
        Command::Sample(args) => commands::sample(args, &cfg),
        Command::Figure(args) => figures::figure(args, &cfg),
        Command::Eval(args) => commands::eval(args, &cfg),
        Command::Families(args) => commands::families(args, &cfg),
    });

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}
