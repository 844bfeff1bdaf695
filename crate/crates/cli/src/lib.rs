//! Command-line front end: configuration, experiment subcommands, CSV tables
//! and JSON manifests.
//!
//! Exit codes: `0` success, `2` configuration error, `3` validation failure,
//! `4` runtime degeneracy.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod validate;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_beam, cmd_count, cmd_scint, write_csv, RunOptions};
pub use config::Config;
pub use manifest::RunManifest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("degenerate run: {0}")]
    Degenerate(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Degenerate(_) => 4,
        }
    }
}

impl From<photoscint::Error> for CliError {
    fn from(e: photoscint::Error) -> Self {
        use photoscint::Error as E;
        match e {
            E::Degenerate(m) => CliError::Degenerate(m),
            E::Validity(m) => CliError::Config(m),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "photoscint", version, about = "Photon counting through frozen atmospheric turbulence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Beam spread versus distance against the closed form.
    Beam(RunArgs),
    /// Scintillation index over a grid of Cn² and coherence.
    Scint(RunArgs),
    /// Sampled and closed-form photocount statistics.
    Count(RunArgs),
    /// Run the oracle suite and report every check.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV destination; the manifest goes to `<out>.manifest.json`.
    /// Without it the CSV is written to stdout and no manifest is kept.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long)]
    pub realizations: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = validate::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Multiplies every tolerance; for exercising the failure path.
    #[arg(long, default_value_t = 1.0, hide = true)]
    pub tolerance_scale: f64,
}

/// Sidecar path for an output file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn emit<R: serde::Serialize>(
    name: &str,
    args: &RunArgs,
    cfg: &Config,
    report: &commands::Report<R>,
    started: Instant,
) -> Result<(), CliError> {
    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            write_csv(&report.rows, file)?;
            let resolved = args_options(args).apply(cfg)?;
            let mut warnings = report.warnings.clone();
            warnings.extend(
                report.degenerate.iter().filter(|d| d.1 > 0).map(|(label, bad, total)| {
                    format!("{label}: {bad} of {total} realizations had fewer than 10 hits")
                }),
            );
            let manifest = RunManifest::new(name, &resolved, args.workers, started.elapsed(), warnings);
            manifest.write(&manifest_path(path))
        }
        None => write_csv(&report.rows, std::io::stdout().lock()),
    }
}

fn args_options(args: &RunArgs) -> RunOptions {
    RunOptions { seed: args.seed, workers: args.workers, realizations: args.realizations }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    match cli.command {
        Command::Validate(args) => {
            let report = validate::run_suite(&validate::SuiteOptions {
                seed: args.seed,
                workers: args.workers,
                tolerance_scale: args.tolerance_scale,
            })?;
            let text = report.render();
            print!("{text}");
            if let Some(path) = &args.out {
                std::fs::write(path, &text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            }
            match report.failures() {
                0 => Ok(()),
                n => Err(CliError::Validation(format!("{n} of {} checks failed", report.checks.len()))),
            }
        }
        Command::Beam(args) => {
            let cfg = Config::load(&args.config)?;
            let report = cmd_beam(&cfg, &args_options(&args))?;
            emit("beam", &args, &cfg, &report, started)
        }
        Command::Scint(args) => {
            let cfg = Config::load(&args.config)?;
            let report = cmd_scint(&cfg, &args_options(&args))?;
            emit("scint", &args, &cfg, &report, started)?;
            report.check_degeneracy(cfg.experiment.degenerate_limit)
        }
        Command::Count(args) => {
            let cfg = Config::load(&args.config)?;
            let report = cmd_count(&cfg, &args_options(&args))?;
            emit("count", &args, &cfg, &report, started)?;
            report.check_degeneracy(cfg.experiment.degenerate_limit)
        }
    }
}
