//! Command-line front end for `pgst-core`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pgst_core::PgstError;
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod output;

pub use config::RunConfig;
pub use output::{Cell, Report};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    /// `tmin` found no crossing, or `validate` exceeded its tolerance.
    pub const NOT_FOUND: i32 = 2;
    pub const RESOURCE: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] PgstError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(PgstError::Resource { .. }) => exit::RESOURCE,
            _ => exit::USAGE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pgst",
    version,
    about = "Pretty-good state transfer through uniform XX spin chains"
)]
pub struct Cli {
    /// Flat `key = value` config file; flags take precedence.
    #[arg(long, global = true, env = "PGST_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Write output to this path instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores). Does not affect results.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify chain lengths by the prime / power-of-two rule.
    Classify(ClassifyArgs),
    /// First time all transfer conditions exceed 1 - eps.
    Tmin(TminArgs),
    /// t_min over chain lengths (axis n) or tolerances (axis eps).
    Sweep(SweepArgs),
    /// Compare Slater amplitudes against dense sector evolution.
    Validate(ValidateArgs),
    /// Single-excitation or Slater mirror amplitudes.
    Amplitude(AmplitudeArgs),
    /// Receiver figure of merit from the dense oracle.
    Fidelity(FidelityArgs),
}

/// Time-grid flags shared by the search commands.
#[derive(Debug, Args, Default)]
pub struct GridArgs {
    /// Coarse grid step (units ħ/J).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Scan horizon; default 10·max(1, 0.29·e^{0.6852 n}).
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Bisection resolution for the crossing.
    #[arg(long)]
    pub refine_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// A length `7` or an inclusive range `1..16`.
    #[arg(long)]
    pub n: Option<String>,
}

#[derive(Debug, Args)]
pub struct TminArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Sender width (number of qubits to transfer).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// `n` or `eps`.
    #[arg(long)]
    pub axis: Option<String>,
    /// Comma-separated lengths (axis n) or a single length (axis eps).
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub m: Option<usize>,
    /// A single tolerance (axis n) or a comma-separated list (axis eps).
    #[arg(long)]
    pub eps: Option<String>,
    /// Append the least-squares exponential fit (axis n).
    #[arg(long)]
    pub fit: bool,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub r_max: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct AmplitudeArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Source site of a single-excitation amplitude.
    #[arg(long)]
    pub from: Option<usize>,
    /// Target site of a single-excitation amplitude.
    #[arg(long)]
    pub to: Option<usize>,
    /// Excited sites, e.g. `1,3`, for the mirror amplitude of that state.
    #[arg(long)]
    pub sites: Option<String>,
    /// List all 2^m - 1 mirror conditions.
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FidelityArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Seed for a random input state (used when --input is absent).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Input amplitudes `re,im;re,im;...` over the 2^m sender basis.
    #[arg(long)]
    pub input: Option<String>,
}

/// Result of a command: the report to emit and the exit code.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub code: i32,
}

/// Runs a parsed command line, writing the report to `--out` or stdout.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    cfg.flag("format", cli.format.as_ref());
    cfg.flag("jobs", cli.jobs);
    if let Some(out) = &cli.out {
        cfg.flag("out", Some(out.display()));
    }

    let format = cfg.peek("format").unwrap_or("csv").to_string();
    if format != "csv" && format != "json" {
        return Err(CliError::Usage(format!(
            "unknown format `{format}` (csv|json)"
        )));
    }
    let jobs: usize = match cfg.peek("jobs") {
        Some(raw) => raw
            .parse()
            .map_err(|_| CliError::Usage(format!("invalid value `{raw}` for jobs")))?,
        None => 0,
    };
    let out_path = cfg.peek("out").map(PathBuf::from);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} worker threads: {e}")))?;
    let outcome = pool.install(|| commands::dispatch(&cli.command, &mut cfg))?;

    let text = match format.as_str() {
        "json" => outcome.report.to_json(),
        _ => outcome.report.to_csv(),
    };
    match out_path {
        Some(path) => std::fs::write(path, text)?,
        None => {
            use std::io::Write;
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()?;
        }
    }
    Ok(outcome.code)
}
