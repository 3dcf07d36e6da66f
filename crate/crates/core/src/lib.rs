//! Optimal trading frequency under rough price dynamics.
//!
//! The deterministic model prices a dyadic trading schedule on a horizon
//! `T` with `2^m` trades; the stochastic model replaces the path by a
//! fractional Brownian motion with `E|dX| = kappa dt^H`.

// Negated float comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod fbm;
pub mod hurst;
pub mod ingest;
pub mod laziness;
pub mod model;
pub mod output;
pub mod stochastic;

pub use error::{Error, Result};
pub use experiments::{
    run_empirical, run_empirical_on_path, run_mc_experiment, sweep_deterministic, CostSpec,
    EmpiricalResult, McExperimentResult, McExperimentSpec,
};
pub use fbm::{sample_path, FbmConfig, FbmGenerator, FbmMethod, FbmPath};
pub use hurst::{fit_scaling, HurstFit, PricePath};
pub use ingest::{load_price_csv, CsvSchema};
pub use laziness::{LazinessMode, LazinessSpec};
pub use model::{optimize_deterministic, DeterministicParams, ProfitCurve};
pub use stochastic::{
    delta_star_closed_form, solve_foc_latency, OptimalInterval, StochasticParams,
};
