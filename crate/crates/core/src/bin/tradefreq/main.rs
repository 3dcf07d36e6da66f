//! `tradefreq` command-line frontend.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "tradefreq",
    version,
    about = "Optimal trading frequency under rough price dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Flat key-value (TOML) config file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent and TRADEFREQ_OUTPUT_DIR is unset
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Output format: json or csv
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Clone)]
pub struct LazinessArgs {
    /// Laziness model: constant, power-of-two-level or power-of-trade-count
    #[arg(long)]
    laziness_mode: Option<String>,
    /// Constant part L0 (ignored for power-of-trade-count)
    #[arg(long)]
    laziness_base: Option<f64>,
    /// Scale lambda of the power term
    #[arg(long)]
    laziness_scale: Option<f64>,
    /// Exponent alpha >= 1 of the power term
    #[arg(long)]
    laziness_exponent: Option<f64>,
}

#[derive(Args, Clone)]
pub struct SchemaArgs {
    /// Input CSV with a header row
    #[arg(long)]
    input: Option<PathBuf>,
    /// Timestamp column name [default: date]
    #[arg(long)]
    date_column: Option<String>,
    /// Price column name [default: close]
    #[arg(long)]
    price_column: Option<String>,
    /// Take logs of prices [default: true]
    #[arg(long)]
    log_transform: Option<bool>,
    /// Non-uniform spacing policy: reject or resample-locf [default: reject]
    #[arg(long)]
    spacing: Option<String>,
    /// Time coordinate: timestamp or observation [default: timestamp]
    #[arg(long)]
    time_axis: Option<String>,
    /// Number of dyadic lags in the scaling regression [default: automatic]
    #[arg(long)]
    levels: Option<u64>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Hurst exponent in (0, 1)
    #[arg(long)]
    hurst: Option<f64>,
    /// Number of steps
    #[arg(long)]
    n: Option<u64>,
    /// RNG seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Volatility scale [default: 1]
    #[arg(long)]
    sigma: Option<f64>,
    /// Linear drift per unit time [default: 0]
    #[arg(long)]
    drift: Option<f64>,
    /// Path horizon [default: 1]
    #[arg(long)]
    horizon: Option<f64>,
    /// Sampler: circulant or cholesky [default: circulant]
    #[arg(long)]
    method: Option<String>,
}

#[derive(Args)]
pub struct OptimizeDetArgs {
    #[command(flatten)]
    common: Common,
    /// Horizon T of the deterministic input
    #[arg(long)]
    horizon: Option<f64>,
    /// Roughness W per halving
    #[arg(long)]
    roughness: Option<f64>,
    /// Microstructure scale c0 [default: 0]
    #[arg(long)]
    micro: Option<f64>,
    /// Spread cost per trade [default: 0]
    #[arg(long)]
    spread: Option<f64>,
    #[command(flatten)]
    laziness: LazinessArgs,
    /// Highest level considered [default: 30]
    #[arg(long)]
    level_cap: Option<u64>,
}

#[derive(Args)]
pub struct OptimizeFbmArgs {
    #[command(flatten)]
    common: Common,
    /// Hurst exponent in (0, 1)
    #[arg(long)]
    hurst: Option<f64>,
    /// Scale of E|dX| = kappa dt^H (exclusive with --sigma)
    #[arg(long)]
    kappa: Option<f64>,
    /// fBM volatility; sets kappa = sigma sqrt(2/pi)
    #[arg(long)]
    sigma: Option<f64>,
    /// Spread cost per trade
    #[arg(long)]
    spread: Option<f64>,
    /// Trading horizon [default: 1]
    #[arg(long)]
    horizon: Option<f64>,
    #[command(flatten)]
    laziness: LazinessArgs,
}

#[derive(Args)]
pub struct EstimateHurstArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    schema: SchemaArgs,
}

#[derive(Args)]
pub struct McArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated Hurst exponents [default: 0.4,0.6,0.8]
    #[arg(long)]
    hurst_values: Option<String>,
    /// Coarsest level [default: 1]
    #[arg(long)]
    m_lo: Option<u64>,
    /// Finest level, at most 20 [default: 12]
    #[arg(long)]
    m_hi: Option<u64>,
    /// Scale of E|dX| = kappa dt^H [default: 0.5]
    #[arg(long)]
    kappa: Option<f64>,
    /// Spread cost per trade [default: 0.002]
    #[arg(long)]
    spread: Option<f64>,
    /// Trading horizon [default: 1]
    #[arg(long)]
    horizon: Option<f64>,
    #[command(flatten)]
    laziness: LazinessArgs,
    /// Simulated paths per Hurst value; 0 gives analytic curves only [default: 1000]
    #[arg(long)]
    n_paths: Option<u64>,
    /// Master RNG seed [default: 20251014]
    #[arg(long)]
    seed: Option<u64>,
    /// Sampler: circulant or cholesky [default: circulant]
    #[arg(long)]
    method: Option<String>,
}

#[derive(Args)]
pub struct EmpiricalArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    schema: SchemaArgs,
    /// Spread cost per trade [default: 0.025]
    #[arg(long)]
    spread: Option<f64>,
    /// Latency scale lambda in lambda n^alpha [default: 0.003]
    #[arg(long)]
    laziness_scale: Option<f64>,
    /// Latency exponent alpha [default: 1.3]
    #[arg(long)]
    laziness_exponent: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a fractional Brownian motion path
    Simulate(SimulateArgs),
    /// Deterministic dyadic profit curve and its optimum
    OptimizeDet(OptimizeDetArgs),
    /// Optimal rebalancing interval for fBM prices
    OptimizeFbm(OptimizeFbmArgs),
    /// Scaling-regression Hurst estimate from a price CSV
    EstimateHurst(EstimateHurstArgs),
    /// Analytic and simulated profit curves across Hurst exponents
    McExperiment(McArgs),
    /// Realized versus fitted-theory profit curves for a price CSV
    Empirical(EmpiricalArgs),
}

fn fail(kind: &str, code: u8, message: &str) -> ExitCode {
    let line = serde_json::json!({ "error": kind, "code": code, "message": message });
    eprintln!("{line}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = e.print();
                return ExitCode::from(2);
            }
            let message = e.to_string();
            let first = message
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            return fail("usage", 2, first);
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::OptimizeDet(a) => commands::optimize_det(a),
        Command::OptimizeFbm(a) => commands::optimize_fbm(a),
        Command::EstimateHurst(a) => commands::estimate_hurst(a),
        Command::McExperiment(a) => commands::mc_experiment(a),
        Command::Empirical(a) => commands::empirical(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), e.exit_code() as u8, &e.to_string()),
    }
}
