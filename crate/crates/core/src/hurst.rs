//! Scaling-law estimation of `(H, kappa)` from a log-price series.
//!
//! For lags `k = 2^0, ..., 2^(L-1)` the mean absolute increment over
//! non-overlapping windows is regressed on `log(k dt)`:
//!
//! ```text
//! log E|dx|_k = log kappa + H log(k dt)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on grid spacing before a series counts as non-uniform.
pub const SPACING_TOLERANCE: f64 = 1e-9;

/// Minimum number of increments required at the coarsest regression level.
pub const MIN_INCREMENTS_PER_LEVEL: usize = 8;

/// Default upper bound on the number of regression levels.
pub const DEFAULT_MAX_LEVELS: u32 = 8;

/// Uniformly sampled log-price series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PricePath {
    pub times: Vec<f64>,
    pub log_prices: Vec<f64>,
    pub delta_t: f64,
}

impl PricePath {
    /// Validates length, finiteness and uniform spacing.
    pub fn new(times: Vec<f64>, log_prices: Vec<f64>) -> Result<Self> {
        if times.len() != log_prices.len() {
            return Err(Error::invalid(
                "log-prices",
                format!("{} timestamps but {} prices", times.len(), log_prices.len()),
            ));
        }
        if times.len() < 2 {
            return Err(Error::Domain(format!(
                "need at least 2 observations, got {}",
                times.len()
            )));
        }
        if let Some(i) = log_prices.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite log price at index {i}")));
        }
        let delta_t = times[1] - times[0];
        if !(delta_t.is_finite() && delta_t > 0.0) {
            return Err(Error::Domain(format!(
                "timestamps must be strictly increasing, first step is {delta_t}"
            )));
        }
        for (i, w) in times.windows(2).enumerate() {
            let step = w[1] - w[0];
            if !((step - delta_t).abs() <= SPACING_TOLERANCE * delta_t) {
                return Err(Error::Domain(format!(
                    "non-uniform spacing at index {}: step {step} differs from {delta_t}",
                    i + 1
                )));
            }
        }
        Ok(PricePath {
            times,
            log_prices,
            delta_t,
        })
    }

    /// Path on a uniform grid `t_i = i dt`.
    pub fn uniform(log_prices: Vec<f64>, delta_t: f64) -> Result<Self> {
        crate::model::positive("delta-t", delta_t)?;
        let times = (0..log_prices.len()).map(|i| i as f64 * delta_t).collect();
        Self::new(times, log_prices)
    }

    /// Carries the last observation forward onto the grid `t0 + i dt`.
    ///
    /// `times` must be strictly increasing; the grid covers `[t0, t_last]`.
    pub fn resample_locf(times: &[f64], log_prices: &[f64], delta_t: f64) -> Result<Self> {
        crate::model::positive("delta-t", delta_t)?;
        if times.len() != log_prices.len() || times.len() < 2 {
            return Err(Error::Domain(
                "resampling needs at least 2 paired observations".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(
                "timestamps must be strictly increasing".into(),
            ));
        }
        let t0 = times[0];
        let span = times[times.len() - 1] - t0;
        let steps = (span / delta_t * (1.0 + SPACING_TOLERANCE)).floor() as usize;
        let mut grid_t = Vec::with_capacity(steps + 1);
        let mut grid_x = Vec::with_capacity(steps + 1);
        let mut j = 0;
        for i in 0..=steps {
            let t = t0 + i as f64 * delta_t;
            while j + 1 < times.len() && times[j + 1] <= t + SPACING_TOLERANCE * delta_t {
                j += 1;
            }
            grid_t.push(t);
            grid_x.push(log_prices[j]);
        }
        Self::new(grid_t, grid_x)
    }

    pub fn len(&self) -> usize {
        self.log_prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_prices.is_empty()
    }

    /// Number of one-step increments.
    pub fn increments_len(&self) -> usize {
        self.log_prices.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.increments_len() as f64 * self.delta_t
    }
}

/// Mean of `|x_{t+k} - x_t|` over `t = 0, k, 2k, ...`.
pub fn mean_abs_increment(path: &PricePath, k: usize) -> Result<f64> {
    let n = path.increments_len();
    if k == 0 || k > n / 2 {
        return Err(Error::Domain(format!(
            "lag {k} leaves fewer than two increments in a series of {n} steps (max lag {})",
            n / 2
        )));
    }
    let x = &path.log_prices;
    let count = n / k;
    let sum: f64 = (0..count).map(|i| (x[(i + 1) * k] - x[i * k]).abs()).sum();
    Ok(sum / count as f64)
}

/// Largest level count whose coarsest lag keeps [`MIN_INCREMENTS_PER_LEVEL`]
/// increments, capped at [`DEFAULT_MAX_LEVELS`].
pub fn default_levels(path: &PricePath) -> u32 {
    let n = path.increments_len();
    let mut levels = 0;
    while levels < DEFAULT_MAX_LEVELS && n >> levels >= MIN_INCREMENTS_PER_LEVEL {
        levels += 1;
    }
    levels
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HurstFit {
    pub hurst: f64,
    pub kappa: f64,
    pub intercept: f64,
    /// Regression levels `j`, lag `k = 2^j`.
    pub levels_used: Vec<u32>,
    pub mean_abs_increments: Vec<f64>,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

/// Unweighted least squares of `log E|dx|` on `log(k dt)` over `m_levels` lags.
pub fn fit_scaling(path: &PricePath, m_levels: u32) -> Result<HurstFit> {
    if m_levels < 3 {
        return Err(Error::invalid(
            "levels",
            format!("need at least 3 levels, got {m_levels}"),
        ));
    }
    let n = path.increments_len();
    let top = m_levels - 1;
    if top >= usize::BITS || n >> top < MIN_INCREMENTS_PER_LEVEL {
        return Err(Error::Domain(format!(
            "{n} increments are too few for {m_levels} levels: lag 2^{top} needs at least {MIN_INCREMENTS_PER_LEVEL} increments"
        )));
    }

    let levels_used: Vec<u32> = (0..m_levels).collect();
    let mean_abs_increments = levels_used
        .iter()
        .map(|&j| mean_abs_increment(path, 1usize << j))
        .collect::<Result<Vec<_>>>()?;
    if let Some(j) = mean_abs_increments.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Estimation(format!(
            "degenerate series: mean absolute increment at lag 2^{j} is zero"
        )));
    }

    let xs: Vec<f64> = levels_used
        .iter()
        .map(|&j| ((1u64 << j) as f64 * path.delta_t).ln())
        .collect();
    let ys: Vec<f64> = mean_abs_increments.iter().map(|v| v.ln()).collect();
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };

    Ok(HurstFit {
        hurst: slope,
        kappa: intercept.exp(),
        intercept,
        levels_used,
        mean_abs_increments,
        r_squared,
        residuals,
    })
}
