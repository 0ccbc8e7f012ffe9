//! Command-line driver for the growth experiment, the identity suites and
//! the Besov estimates.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod parse;
pub mod report;

/// Process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_SUITE_FAILURE: u8 = 1;
pub const EXIT_CONFIG_ERROR: u8 = 2;

/// Caps the worker pool; unset means one worker per hardware thread.
pub const THREADS_ENV: &str = "XPLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "xplab", version, about = "Operator-integral experiments for noncommuting triples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lipschitz-ratio growth of the counterexample family.
    Growth(GrowthArgs),
    /// Seeded identity suites; exits 1 if any fails.
    Verify(VerifyArgs),
    /// Littlewood–Paley estimate of the homogeneous B¹_{∞,1} seminorm.
    Besov(BesovArgs),
}

#[derive(Debug, Args)]
pub struct GrowthArgs {
    /// Sizes, e.g. `4,8,16` or `4,8,…,512`.
    #[arg(long, default_value = "4,8,…,512")]
    pub sizes: String,
    /// ε schedule: constant, 1/n or 1/loglog.
    #[arg(long = "eps", default_value = "constant")]
    pub epsilon: String,
    /// CSV report path.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON report path (`-` for stdout).
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Largest size that gets a Besov estimate.
    #[arg(long, default_value_t = 64)]
    pub besov_max: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Cases per randomized suite.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// JSON report path (`-` for stdout).
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Runs the suites against a deliberately perturbed double operator
    /// integral; they must fail.
    #[cfg(debug_assertions)]
    #[arg(long, hide = true)]
    pub tamper_doi: bool,
}

#[derive(Debug, Args)]
pub struct BesovArgs {
    /// eta, psi, constant, phi_tri:<n> or f3:<n>.
    #[arg(long = "fn")]
    pub function: String,
    /// Half-width of the sampling interval for one-variable functions,
    /// e.g. `64pi` [default: 64pi].
    #[arg(long)]
    pub extent: Option<String>,
    /// Grid points for one-variable functions (power of two)
    /// [default: 16384].
    #[arg(long)]
    pub points: Option<usize>,
    /// Band range `lo:hi`; the upper end defaults to the highest band the
    /// grid resolves.
    #[arg(long)]
    pub bands: Option<String>,
    /// JSON report path (`-` for stdout).
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Reads the thread cap from the environment.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => bail!("{THREADS_ENV}: {e}"),
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .with_context(|| format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
            if n == 0 {
                bail!("{THREADS_ENV} must be a positive integer, got 0");
            }
            Ok(Some(n))
        }
    }
}

pub fn configure_threads() -> Result<()> {
    if let Some(n) = thread_cap()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    Ok(())
}

/// Runs a parsed command. `Ok(false)` means a suite failed; errors are
/// configuration problems.
pub fn run(cli: Cli) -> Result<bool> {
    configure_threads()?;
    match cli.command {
        Command::Growth(a) => commands::growth(&a).map(|_| true),
        Command::Verify(a) => commands::verify(&a),
        Command::Besov(a) => commands::besov(&a).map(|_| true),
    }
}
