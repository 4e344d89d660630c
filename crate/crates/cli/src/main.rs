//! `regen-bounds`: convergence-rate bounds for renewal overshoot processes.
//!
//! Exit status: 0 success, 1 configuration error, 2 mathematical
//! precondition failure (reported as a JSON object on stderr), 3
//! verification failure.

// `!(x > 0.0)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use config::{AutoOr, ConfigError, TimeGrid};

#[derive(Parser, Debug)]
#[command(
    name = "regen-bounds",
    version,
    about = "Coupling bounds for renewal overshoot convergence"
)]
struct Cli {
    /// JSON file with command settings; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "REGEN_BOUNDS_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute Ξ, κ(Θ), ϰ, Υ, Υ̃ and the polynomial (and optional exponential) rate curves.
    Bound(BoundArgs),
    /// Simulate overshoots B_t of independent renewal paths.
    Simulate(SimulateArgs),
    /// Run the parallel coupling and report coupling times.
    Couple(CoupleArgs),
    /// Check the polynomial rate curve against Monte Carlo TV estimates.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Kappa,
    Upsilon,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    Abs,
    Mean,
}

fn json_arg(s: &str) -> Result<Value, String> {
    serde_json::from_str(s).map_err(|e| format!("not valid JSON: {e}"))
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct BoundArgs {
    /// Lifetime law as JSON, e.g. '{"family":"exponential","rate":1.0}'.
    #[arg(long, value_parser = json_arg)]
    pub dist: Option<Value>,
    /// Polynomial order ℓ.
    #[arg(long)]
    pub ell: Option<u32>,
    /// Initial overshoot b.
    #[arg(long)]
    pub b: Option<f64>,
    /// Second initial overshoot b′ (for Υ and K_β).
    #[arg(long)]
    pub b_prime: Option<f64>,
    /// Threshold Θ, or `auto`.
    #[arg(long)]
    pub theta: Option<AutoOr>,
    /// Upper end of the Θ search (default 20 Ξ).
    #[arg(long)]
    pub theta_max: Option<f64>,
    /// What `--theta auto` optimizes.
    #[arg(long, value_enum)]
    pub optimize: Option<Objective>,
    /// Use (i+1)^max(2,ℓ) in the Υ series.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub strict_series: Option<bool>,
    /// Also compute the exponential bound for this α (needs E e^{αξ} < ∞).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Times at which to sample the rate curves.
    #[arg(long)]
    pub t_grid: Option<TimeGrid>,
    /// Output file (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SimulateArgs {
    #[arg(long, value_parser = json_arg)]
    pub dist: Option<Value>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Observation time(s).
    #[arg(long)]
    pub t: Option<TimeGrid>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overshoot CSV `path_id,t,overshoot` (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also dump renewal epochs as CSV `path_id,k,epoch`.
    #[arg(long)]
    pub paths_csv: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct CoupleArgs {
    #[arg(long, value_parser = json_arg)]
    pub dist: Option<Value>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub b_prime: Option<f64>,
    /// Threshold Θ, or `auto` (maximizes ϰ).
    #[arg(long)]
    pub theta: Option<AutoOr>,
    #[arg(long)]
    pub theta_max: Option<f64>,
    #[arg(long)]
    pub traces: Option<usize>,
    /// Censoring horizon.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Draw both first residual lifetimes from one uniform.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub shared_first_gap: Option<bool>,
    /// JSON-lines traces (default stdout; the summary then goes to stderr).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON file (default: stdout when `--out` is given).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct VerifyArgs {
    #[arg(long, value_parser = json_arg)]
    pub dist: Option<Value>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub ell: Option<u32>,
    #[arg(long)]
    pub theta: Option<AutoOr>,
    #[arg(long)]
    pub theta_max: Option<f64>,
    #[arg(long, value_enum)]
    pub optimize: Option<Objective>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub strict_series: Option<bool>,
    #[arg(long)]
    pub t_grid: Option<TimeGrid>,
    /// Read the grid in absolute time or in multiples of Eξ.
    #[arg(long, value_enum)]
    pub t_unit: Option<TimeUnit>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Multiply Υ̃ by this factor (harness self-test).
    #[arg(long)]
    pub inject_bound_scale: Option<f64>,
    /// Report JSON (default stdout).
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    /// Per-time CSV `t,tv_hat,band,bound,pass`.
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
}

/// Failure classes mapped onto exit codes.
pub enum Failure {
    Config(ConfigError),
    Math(regen_core::Error),
    Verification,
    Io(std::io::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<regen_core::Error> for Failure {
    fn from(e: regen_core::Error) -> Self {
        Failure::Math(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Math(e)) => {
            let body =
                serde_json::json!({ "error": { "code": e.code(), "message": e.to_string() } });
            eprintln!("{body}");
            ExitCode::from(2)
        }
        Err(Failure::Verification) => ExitCode::from(3),
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(ConfigError::field("jobs", "must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| ConfigError::field("jobs", e))?;
    }
    let config = cli.config.as_deref();
    match cli.command {
        Command::Bound(a) => commands::bound(config::merge(&a, config)?),
        Command::Simulate(a) => commands::simulate(config::merge(&a, config)?),
        Command::Couple(a) => commands::couple(config::merge(&a, config)?),
        Command::Verify(a) => commands::verify(config::merge(&a, config)?),
    }
}
