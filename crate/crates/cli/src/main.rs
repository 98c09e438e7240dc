//! Batch driver wiring the samplers, kernels, pairing quadrature and
//! chaos-measure estimators into reproducible experiments.
//!
//! Exit codes: 0 success, 1 runtime or assertion failure, 2 config
//! rejection. Machine-readable errors go to stderr as one-line JSON.
//! Every command is a pure function of (config, seed): outputs are
//! byte-identical across reruns and across --threads settings.

// negated float comparisons reject NaN inputs on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Environment variable overriding the output directory (the --out flag
/// still wins over it).
pub const OUT_DIR_ENV: &str = "FBMZERO_OUT";

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration: exit code 2, no outputs written.
    Config(String),
    /// Failure during execution or a violated result assertion: exit 1.
    Runtime(String),
}

impl CliError {
    pub fn config(err: impl std::fmt::Display) -> Self {
        CliError::Config(err.to_string())
    }

    pub fn runtime(err: impl std::fmt::Display) -> Self {
        CliError::Runtime(err.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "fbmzero",
    version,
    about = "Fractional Brownian motion near zero Hurst: sampling, limit kernels, pairing convergence and chaos-measure spectra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample fBm (and optionally the normalized field) to CSV/binary files.
    Sample(RunArgs),
    /// Tabulate the kernel decomposition against its limit over an h sweep.
    KernelTable(RunArgs),
    /// Pairing double integrals along an h sweep, with optional MC columns.
    ConvergePairing(RunArgs),
    /// Moment-scaling spectrum of the chaos measure, plus the Frisch-Parisi
    /// identity subtable.
    GmcSpectrum(RunArgs),
    /// Fast invariant suite; exits 1 listing any failed check.
    Selfcheck(SelfcheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration for this run.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: machine parallelism).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory (default: $FBMZERO_OUT or the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelfcheckArgs {
    /// Seed for the randomized sweeps inside the checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

pub struct RunContext {
    out_dir: PathBuf,
    seed_override: Option<u64>,
    threads: usize,
    pool: rayon::ThreadPool,
}

impl RunContext {
    fn new(args: &RunArgs) -> Result<Self, CliError> {
        let out_dir = args
            .out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let threads = args
            .threads
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if threads == 0 {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(CliError::runtime)?;
        Ok(RunContext {
            out_dir,
            seed_override: args.seed,
            threads,
            pool,
        })
    }

    fn load_config<T: serde::de::DeserializeOwned>(&self, path: &PathBuf) -> Result<T, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Sample(args) => commands::sample::run(&RunContext::new(args)?, args),
        Command::KernelTable(args) => commands::kernel_table::run(&RunContext::new(args)?, args),
        Command::ConvergePairing(args) => {
            commands::converge_pairing::run(&RunContext::new(args)?, args)
        }
        Command::GmcSpectrum(args) => commands::gmc_spectrum::run(&RunContext::new(args)?, args),
        Command::Selfcheck(args) => commands::selfcheck::run(args.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(msg)) => {
            eprintln!("{}", error_json("runtime", &msg));
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("{}", error_json("config", &msg));
            ExitCode::from(2)
        }
    }
}

fn error_json(kind: &str, message: &str) -> String {
    serde_json::to_string(&serde_json::json!({ "error": kind, "message": message }))
        .unwrap_or_else(|_| format!("{{\"error\":\"{kind}\"}}"))
}
