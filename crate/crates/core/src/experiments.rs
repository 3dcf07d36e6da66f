//! Monte-Carlo, empirical and deterministic-sweep pipelines.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::{check_hurst, FbmConfig, FbmGenerator, FbmMethod};
use crate::hurst::{default_levels, fit_scaling, HurstFit, PricePath};
use crate::ingest::{load_price_csv, CsvSchema};
use crate::laziness::LazinessSpec;
use crate::model::{optimize_deterministic, DeterministicParams, ProfitCurve};
use crate::stochastic::{
    delta_star_closed_form, expected_profit_curve, sigma_from_kappa, solve_foc_latency,
    OptimalInterval, StochasticParams,
};

/// Finest level the Monte-Carlo harness will simulate (`2^20` steps per path).
pub const MAX_MC_LEVEL: u32 = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McExperimentSpec {
    pub hurst_values: Vec<f64>,
    pub m_lo: u32,
    pub m_hi: u32,
    pub kappa: f64,
    pub spread: f64,
    pub horizon: f64,
    pub laziness: LazinessSpec,
    pub n_paths: usize,
    pub seed: u64,
    pub method: FbmMethod,
}

impl Default for McExperimentSpec {
    fn default() -> Self {
        McExperimentSpec {
            hurst_values: vec![0.40, 0.60, 0.80],
            m_lo: 1,
            m_hi: 12,
            kappa: 0.5,
            spread: 0.002,
            horizon: 1.0,
            laziness: LazinessSpec::power_of_two_level(0.0, 6e-4, 1.4),
            n_paths: 1000,
            seed: 20_251_014,
            method: FbmMethod::Circulant,
        }
    }
}

impl McExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.hurst_values.is_empty() {
            return Err(Error::invalid(
                "hurst-values",
                "need at least one Hurst exponent",
            ));
        }
        for &h in &self.hurst_values {
            check_hurst(h)?;
        }
        if self.m_lo > self.m_hi {
            return Err(Error::invalid(
                "m-range",
                format!("m_lo {} exceeds m_hi {}", self.m_lo, self.m_hi),
            ));
        }
        if self.m_hi > MAX_MC_LEVEL {
            return Err(Error::invalid(
                "m-range",
                format!("m_hi must be <= {MAX_MC_LEVEL}"),
            ));
        }
        self.params(self.hurst_values[0])?;
        Ok(())
    }

    fn params(&self, hurst: f64) -> Result<StochasticParams> {
        StochasticParams::new(hurst, self.kappa, self.spread, self.horizon, self.laziness)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulatedCurve {
    pub curve: ProfitCurve,
    /// Mean over paths of the per-level mean absolute increment.
    pub mean_abs_increments: Vec<f64>,
    pub standard_errors: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McHurstRecord {
    pub hurst: f64,
    /// Expected profit on the dyadic grid `delta = T/2^m`.
    pub profit_curve: ProfitCurve,
    /// `kappa delta^H` per level.
    pub analytic_mean_abs_increments: Vec<f64>,
    pub simulated: Option<SimulatedCurve>,
    /// Argmax of the analytic curve.
    pub m_star_sim: u32,
    /// Argmax of the path-averaged curve, when paths were simulated.
    pub m_star_paths: Option<u32>,
    pub m_star_theory_costfree: u32,
    pub m_star_theory_latency: u32,
    pub theory_costfree: OptimalInterval,
    pub theory_latency: OptimalInterval,
    /// `(T/2^m_star_sim - delta*_latency) / delta*_latency`.
    pub relative_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McExperimentResult {
    pub spec: McExperimentSpec,
    pub records: Vec<McHurstRecord>,
}

/// Per-path seed: `seed` xor a SplitMix64 hash of `(H index, path index)`.
pub fn path_seed(seed: u64, hurst_index: usize, path_index: usize) -> u64 {
    let mut z =
        ((hurst_index as u64) << 32 | path_index as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    seed ^ (z ^ (z >> 31))
}

/// Mean `|increment|` at each level `lo..=hi` from fine-grid increments of
/// length `2^hi`.
fn level_mean_abs(increments: &[f64], lo: u32, hi: u32) -> Vec<f64> {
    (lo..=hi)
        .map(|m| {
            let stride = 1usize << (hi - m);
            let windows = 1usize << m;
            let total: f64 = increments
                .chunks_exact(stride)
                .map(|c| c.iter().sum::<f64>().abs())
                .sum();
            total / windows as f64
        })
        .collect()
}

fn simulate_level_increments(
    spec: &McExperimentSpec,
    hurst_index: usize,
    hurst: f64,
) -> Result<SimulatedCurve> {
    let n_fine = 1usize << spec.m_hi;
    let gen = FbmGenerator::new(FbmConfig {
        hurst,
        sigma: sigma_from_kappa(spec.kappa)?,
        drift: 0.0,
        n_steps: n_fine,
        horizon: spec.horizon,
        method: spec.method,
        seed: spec.seed,
    })?;
    let per_path: Vec<Vec<f64>> = (0..spec.n_paths)
        .into_par_iter()
        .map(|i| {
            level_mean_abs(
                &gen.increments(path_seed(spec.seed, hurst_index, i)),
                spec.m_lo,
                spec.m_hi,
            )
        })
        .collect();

    // Sequential reduction in path order keeps the result independent of
    // thread scheduling.
    let levels = (spec.m_hi - spec.m_lo + 1) as usize;
    let count = per_path.len() as f64;
    let mut mean = vec![0.0; levels];
    for row in &per_path {
        for (acc, v) in mean.iter_mut().zip(row) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= count);
    let mut var = vec![0.0; levels];
    for row in &per_path {
        for ((acc, v), mu) in var.iter_mut().zip(row).zip(&mean) {
            *acc += (v - mu).powi(2);
        }
    }
    let standard_errors = var
        .iter()
        .map(|v| {
            if count > 1.0 {
                (v / (count - 1.0) / count).sqrt()
            } else {
                f64::NAN
            }
        })
        .collect();

    let profits = (spec.m_lo..=spec.m_hi)
        .zip(&mean)
        .map(|(m, mu)| (m as f64).exp2() * (mu - spec.spread) - spec.laziness.at_level(m))
        .collect();
    Ok(SimulatedCurve {
        curve: ProfitCurve::from_profits(spec.m_lo, profits),
        mean_abs_increments: mean,
        standard_errors,
    })
}

/// Analytic and (optionally) path-averaged dyadic profit curves per `H`,
/// together with the continuous theory optima.
pub fn run_mc_experiment(spec: &McExperimentSpec) -> Result<McExperimentResult> {
    spec.validate()?;
    let mut records = Vec::with_capacity(spec.hurst_values.len());
    for (hi, &hurst) in spec.hurst_values.iter().enumerate() {
        let p = spec.params(hurst)?;
        let profit_curve = expected_profit_curve(&p, spec.m_lo, spec.m_hi);
        let m_star_sim = profit_curve.m_star.expect("nonempty level range");
        let analytic_mean_abs_increments = (spec.m_lo..=spec.m_hi)
            .map(|m| p.kappa * (p.horizon / (m as f64).exp2()).powf(hurst))
            .collect();
        let theory_costfree = delta_star_closed_form(&p.without_latency())?;
        let theory_latency = solve_foc_latency(&p)?;
        let simulated = if spec.n_paths > 0 {
            Some(simulate_level_increments(spec, hi, hurst)?)
        } else {
            None
        };
        let delta_sim = p.horizon / (m_star_sim as f64).exp2();
        records.push(McHurstRecord {
            hurst,
            analytic_mean_abs_increments,
            m_star_paths: simulated.as_ref().and_then(|s| s.curve.m_star),
            simulated,
            m_star_sim,
            m_star_theory_costfree: theory_costfree.m_star_rounded,
            m_star_theory_latency: theory_latency.m_star_rounded,
            relative_gap: (delta_sim - theory_latency.delta_star) / theory_latency.delta_star,
            theory_costfree,
            theory_latency,
            profit_curve,
        });
    }
    Ok(McExperimentResult {
        spec: spec.clone(),
        records,
    })
}

/// Per-trade spread and latency cost `lambda n^alpha` for the empirical study.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    pub spread: f64,
    pub scale: f64,
    pub exponent: f64,
}

impl Default for CostSpec {
    fn default() -> Self {
        CostSpec {
            spread: 0.025,
            scale: 0.003,
            exponent: 1.3,
        }
    }
}

impl CostSpec {
    pub fn laziness(&self) -> LazinessSpec {
        LazinessSpec::power_of_trade_count(self.scale, self.exponent)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalResult {
    pub fit: HurstFit,
    pub horizon: f64,
    pub n_increments: usize,
    /// Realized profit with `2^m` trades of `floor(N/2^m)` samples each.
    pub empirical_curve: ProfitCurve,
    pub empirical_mean_abs_increments: Vec<f64>,
    /// Expected profit from the fitted `(H, kappa)` on `delta = T/2^m`.
    pub theory_curve: ProfitCurve,
    pub m_star_emp: u32,
    pub m_star_theory: u32,
    pub theory_costfree: OptimalInterval,
    pub theory_latency: OptimalInterval,
}

/// Realized dyadic profit curve over levels `0..=floor(log2 N)`.
///
/// Level `m` makes exactly `2^m` trades using windows of `floor(N/2^m)`
/// samples from index 0; samples past the last full window are dropped.
pub fn empirical_profit_curve(path: &PricePath, costs: &CostSpec) -> (ProfitCurve, Vec<f64>) {
    let n = path.increments_len();
    let top = n.ilog2();
    let lazy = costs.laziness();
    let x = &path.log_prices;
    let mut profits = Vec::with_capacity(top as usize + 1);
    let mut means = Vec::with_capacity(top as usize + 1);
    for m in 0..=top {
        let trades = 1usize << m;
        let k = n >> m;
        let gross: f64 = (0..trades).map(|i| (x[(i + 1) * k] - x[i * k]).abs()).sum();
        means.push(gross / trades as f64);
        profits.push(gross - trades as f64 * costs.spread - lazy.at_level(m));
    }
    (ProfitCurve::from_profits(0, profits), means)
}

/// Fits `(H, kappa)` and compares the realized and theoretical profit curves.
pub fn run_empirical_on_path(
    path: &PricePath,
    costs: &CostSpec,
    m_levels: Option<u32>,
) -> Result<EmpiricalResult> {
    let levels = m_levels.unwrap_or_else(|| default_levels(path));
    let fit = fit_scaling(path, levels)?;
    if !(fit.hurst > 0.0 && fit.hurst < 1.0) {
        return Err(Error::Estimation(format!(
            "fitted Hurst exponent {} lies outside (0, 1); the fBM profit model does not apply",
            fit.hurst
        )));
    }
    let (empirical_curve, empirical_mean_abs_increments) = empirical_profit_curve(path, costs);
    let horizon = path.horizon();
    let p = StochasticParams::new(
        fit.hurst,
        fit.kappa,
        costs.spread,
        horizon,
        costs.laziness(),
    )?;
    let theory_curve = expected_profit_curve(&p, 0, empirical_curve.m_max);
    Ok(EmpiricalResult {
        horizon,
        n_increments: path.increments_len(),
        m_star_emp: empirical_curve.m_star.expect("nonempty curve"),
        m_star_theory: theory_curve.m_star.expect("nonempty curve"),
        theory_costfree: delta_star_closed_form(&p.without_latency())?,
        theory_latency: solve_foc_latency(&p)?,
        fit,
        empirical_curve,
        empirical_mean_abs_increments,
        theory_curve,
    })
}

pub fn run_empirical(
    csv: &Path,
    schema: &CsvSchema,
    costs: &CostSpec,
    m_levels: Option<u32>,
) -> Result<EmpiricalResult> {
    let path = load_price_csv(csv, schema)?;
    run_empirical_on_path(&path, costs, m_levels).map_err(|e| match e {
        Error::Estimation(msg) => Error::Estimation(format!("{}: {msg}", csv.display())),
        Error::Domain(msg) => Error::Domain(format!("{}: {msg}", csv.display())),
        other => other,
    })
}

/// Full deterministic profit curve for plotting.
pub fn sweep_deterministic(p: &DeterministicParams) -> Result<ProfitCurve> {
    optimize_deterministic(p)
}
