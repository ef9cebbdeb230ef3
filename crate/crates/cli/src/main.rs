//! `coherence-proj`: configuration-driven projections and verification
//! suites.
//!
//! Exit codes: 0 success, 1 a check failed, 2 solver or I/O failure,
//! 3 configuration error.

mod config;
mod output;
mod tasks;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use bregman_coherence::Error;
use clap::Parser;
use serde_json::json;
use thiserror::Error as ThisError;

use config::Config;
use tasks::Overrides;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Solver(String),
    #[error(transparent)]
    Io(#[from] anyhow::Error),
}

impl CliError {
    /// Input-shaped library errors are configuration problems; the rest
    /// come from the numerics.
    pub fn from_lib(e: Error) -> Self {
        match e {
            Error::Invalid(_) | Error::Shape(_) | Error::NotInvolution | Error::MissingConstant(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Solver(other.to_string()),
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 3,
            CliError::Solver(_) | CliError::Io(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "coherence-proj", version, about = "Coherence-constrained Bregman projections and verification suites")]
struct Args {
    /// JSON configuration (schema version 1). Optional when --suite is given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report.json, metadata.json, summary.txt and CSV tables.
    #[arg(long, default_value = "coherence-proj-out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for verification suites; 0 uses every logical core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Verification suite to run (overrides the config's verify.suite).
    #[arg(long)]
    suite: Option<String>,
    /// Replaces the tolerance of every numeric verdict. Solver tolerances are unaffected.
    #[arg(long, allow_hyphen_values = true)]
    tol_override: Option<f64>,
    /// Budget Λ for the constrained relaxed projection.
    #[arg(long, conflicts_with = "penalty")]
    lambda_cap: Option<f64>,
    /// Multiplier λ for the penalized relaxed projection.
    #[arg(long)]
    penalty: Option<f64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("COHERENCE_PROJ_LOG", "warn")).init();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("coherence-proj: {e:#}");
            ExitCode::from(e.code())
        }
    }
}

/// Ok(passed) once every output is written.
fn run(args: &Args) -> Result<bool, CliError> {
    let cfg = match &args.config {
        Some(path) => Config::load(path)?,
        None if args.suite.is_some() => Config::verify_only(),
        None => return Err(CliError::Config("either --config or --suite is required".into())),
    };
    let ov = Overrides {
        seed: args.seed,
        jobs: args.jobs,
        suite: args.suite.clone(),
        lambda_cap: args.lambda_cap,
        penalty: args.penalty,
        tol_override: args.tol_override,
    };
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    log::info!("running {:?}", cfg.task);
    let outcome = tasks::run(&cfg, &ov)?;
    let passed = outcome.checks.passed();
    write_outputs(&args.out, &cfg, &ov, &outcome, started)?;
    print!("{}", outcome.checks.summary());
    Ok(passed)
}

fn write_outputs(
    dir: &Path,
    cfg: &Config,
    ov: &Overrides,
    outcome: &tasks::Outcome,
    started: u64,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let rep = &outcome.checks;
    let report = json!({
        "tool": "coherence-proj",
        "schema_version": config::SCHEMA_VERSION,
        "task": cfg.task,
        "seed": rep.seed,
        "passed": rep.passed(),
        "failed_checks": rep.failures().len(),
        "tol_override": ov.tol_override,
        "config": cfg,
        "result": outcome.result,
        "report": rep,
    });
    output::write_json(&dir.join("report.json"), &report)?;
    let metadata = json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "started_unix_s": started,
        "wall_ms": outcome.wall_ns as f64 / 1e6,
        "jobs": if ov.jobs == 0 { logical_cores() } else { ov.jobs },
        "rng": bregman_coherence::empirical::RNG_ALGORITHM,
    });
    output::write_json(&dir.join("metadata.json"), &metadata)?;
    std::fs::write(dir.join("summary.txt"), rep.summary()).context("writing summary.txt")?;
    for t in &rep.tables {
        output::write_table(dir, t)?;
    }
    Ok(())
}

fn logical_cores() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
