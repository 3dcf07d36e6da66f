//! Expected profit under fBM scaling and the optimal trading interval.
//!
//! With `E|dX| = kappa delta^H`, trading every `delta` over horizon `T` gives
//!
//! ```text
//! R(delta) = kappa T delta^(H-1) - T s / delta - L
//! ```
//!
//! For constant `L` the maximizer is `delta* = (s / (kappa (1-H)))^(1/H)`.
//! With latency cost `L(n) = lambda n^alpha`, `n = T/delta`, the first-order
//! condition becomes
//!
//! ```text
//! kappa (1-H) delta^H = s + lambda alpha T^(alpha-1) delta^(1-alpha)
//! ```
//!
//! whose left side minus right side is strictly increasing in `delta`; it is
//! solved by safeguarded Newton iteration.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::check_hurst;
use crate::laziness::{LazinessMode, LazinessSpec};
use crate::model::{positive, ProfitCurve};

pub const NEWTON_MAX_ITERATIONS: u32 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochasticParams {
    pub hurst: f64,
    pub kappa: f64,
    pub spread: f64,
    pub horizon: f64,
    pub laziness: LazinessSpec,
}

impl StochasticParams {
    pub fn new(
        hurst: f64,
        kappa: f64,
        spread: f64,
        horizon: f64,
        laziness: LazinessSpec,
    ) -> Result<Self> {
        let p = StochasticParams {
            hurst,
            kappa,
            spread,
            horizon,
            laziness,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_hurst(self.hurst)?;
        positive("kappa", self.kappa)?;
        positive("spread", self.spread)?;
        positive("horizon", self.horizon)?;
        self.laziness.validate()
    }

    /// Same parameters with laziness replaced by a constant `base`.
    pub fn without_latency(&self) -> Self {
        StochasticParams {
            laziness: LazinessSpec::constant(self.laziness.base),
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    ClosedForm,
    Newton,
    Bisection,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalInterval {
    pub delta_star: f64,
    pub n_star: f64,
    pub m_star_rounded: u32,
    /// First-order condition evaluated at `delta_star` (left minus right side).
    pub foc_residual: f64,
    /// Central-difference second derivative of the expected profit.
    pub second_order_value: f64,
    /// Analytic second derivative at `delta_star`.
    pub second_order_analytic: f64,
    pub method: SolveMethod,
    pub iterations: u32,
}

/// `kappa = sigma sqrt(2/pi)`; `B^H_1 ~ N(0,1)` makes this independent of `H`.
pub fn kappa_from_sigma(sigma: f64, hurst: f64) -> Result<f64> {
    positive("sigma", sigma)?;
    check_hurst(hurst)?;
    Ok(sigma * (2.0 / PI).sqrt())
}

pub fn sigma_from_kappa(kappa: f64) -> Result<f64> {
    positive("kappa", kappa)?;
    Ok(kappa / (2.0 / PI).sqrt())
}

/// Laziness cost for `T/delta` trades; level mode reads `2^(alpha m)` as `n^alpha`.
fn laziness_at(delta: f64, p: &StochasticParams) -> f64 {
    p.laziness.at_trade_count(p.horizon / delta)
}

fn profit_extended(delta: f64, p: &StochasticParams) -> f64 {
    let t = p.horizon;
    p.kappa * t * delta.powf(p.hurst - 1.0) - t * p.spread / delta - laziness_at(delta, p)
}

/// Expected profit when trading every `delta`.
///
/// The level laziness mode is only defined on the dyadic grid
/// `delta = T / 2^m`; other `delta` are rejected for it.
pub fn expected_profit(delta: f64, p: &StochasticParams) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Domain(format!(
            "trading interval must be positive, got {delta}"
        )));
    }
    if p.laziness.mode == LazinessMode::PowerOfTwoLevel {
        let level = (p.horizon / delta).log2();
        if level < -1e-9 || (level - level.round()).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "level laziness needs delta = T/2^m; delta = {delta} gives log2(T/delta) = {level}"
            )));
        }
    }
    Ok(profit_extended(delta, p))
}

/// Expected profit at level `m`, `delta = T/2^m`, laziness evaluated per level.
pub fn expected_profit_at_level(m: u32, p: &StochasticParams) -> f64 {
    let n = (m as f64).exp2();
    let delta = p.horizon / n;
    let t = p.horizon;
    p.kappa * t * delta.powf(p.hurst - 1.0) - t * p.spread / delta - p.laziness.at_level(m)
}

/// Expected-profit curve over levels `lo..=hi`.
pub fn expected_profit_curve(p: &StochasticParams, lo: u32, hi: u32) -> ProfitCurve {
    let profits = (lo..=hi).map(|m| expected_profit_at_level(m, p)).collect();
    ProfitCurve::from_profits(lo, profits)
}

/// Analytic `R''(delta)`, including the latency term.
pub fn expected_profit_second_derivative(delta: f64, p: &StochasticParams) -> f64 {
    let (h, t) = (p.hurst, p.horizon);
    let mut v = p.kappa * t * (h - 1.0) * (h - 2.0) * delta.powf(h - 3.0)
        - 2.0 * t * p.spread * delta.powi(-3);
    if !p.laziness.is_constant() {
        let (lambda, alpha) = (p.laziness.scale, p.laziness.exponent);
        v -= lambda * alpha * (alpha + 1.0) * t.powf(alpha) * delta.powf(-alpha - 2.0);
    }
    v
}

fn numeric_second_derivative(delta: f64, p: &StochasticParams) -> f64 {
    let h = 1e-4 * delta;
    let f = |x: f64| profit_extended(x, p);
    (f(delta + h) - 2.0 * f(delta) + f(delta - h)) / (h * h)
}

/// Dyadic level nearest to `log2(T / delta)`; ties go to the coarser level.
pub fn nearest_level(delta: f64, horizon: f64) -> u32 {
    let x = (horizon / delta).log2();
    if !(x > 0.0) {
        return 0;
    }
    let floor = x.floor();
    let m = if x - floor > 0.5 { floor + 1.0 } else { floor };
    m.min(u32::MAX as f64) as u32
}

fn interval(
    delta: f64,
    p: &StochasticParams,
    foc_residual: f64,
    method: SolveMethod,
    iterations: u32,
) -> OptimalInterval {
    OptimalInterval {
        delta_star: delta,
        n_star: p.horizon / delta,
        m_star_rounded: nearest_level(delta, p.horizon),
        foc_residual,
        second_order_value: numeric_second_derivative(delta, p),
        second_order_analytic: expected_profit_second_derivative(delta, p),
        method,
        iterations,
    }
}

/// `delta* = (s / (kappa (1-H)))^(1/H)` for frequency-independent laziness.
pub fn delta_star_closed_form(p: &StochasticParams) -> Result<OptimalInterval> {
    p.validate()?;
    if !p.laziness.is_constant() {
        return Err(Error::Domain(
            "closed-form optimum requires constant laziness; use the latency solver".into(),
        ));
    }
    let a = p.kappa * (1.0 - p.hurst);
    let delta = (p.spread / a).powf(1.0 / p.hurst);
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Numerical(format!(
            "closed-form optimum overflowed: {delta}"
        )));
    }
    let residual = a * delta.powf(p.hurst) - p.spread;
    Ok(interval(delta, p, residual, SolveMethod::ClosedForm, 0))
}

/// Optimal interval under power-law latency cost `lambda n^alpha`.
///
/// `alpha = 1` and `lambda = 0` use closed forms; otherwise Newton starts
/// from the frictionless optimum and falls back to bisection if a step leaves
/// `(0, inf)`, produces a non-finite residual, or the iteration budget runs out.
pub fn solve_foc_latency(p: &StochasticParams) -> Result<OptimalInterval> {
    p.validate()?;
    let (h, t, s) = (p.hurst, p.horizon, p.spread);
    let a = p.kappa * (1.0 - h);
    let (lambda, alpha) = match p.laziness.mode {
        LazinessMode::Constant => (0.0, 1.0),
        _ => (p.laziness.scale, p.laziness.exponent),
    };
    // Latency coefficient in the first-order condition; T^(alpha-1) is 1 at T=1.
    let b = lambda * alpha * t.powf(alpha - 1.0);
    let g = |d: f64| a * d.powf(h) - s - b * d.powf(1.0 - alpha);
    let tol = 1e-12 * s.max(1.0);

    if lambda == 0.0 || alpha == 1.0 {
        let delta = ((s + b) / a).powf(1.0 / h);
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Numerical(format!(
                "closed-form optimum overflowed: {delta}"
            )));
        }
        return Ok(interval(delta, p, g(delta), SolveMethod::ClosedForm, 0));
    }

    let dg = |d: f64| a * h * d.powf(h - 1.0) + b * (alpha - 1.0) * d.powf(-alpha);
    let start = (s / a).powf(1.0 / h);
    let mut delta = start;
    let mut iterations = 0;
    if start.is_finite() && start > 0.0 {
        while iterations < NEWTON_MAX_ITERATIONS {
            let r = g(delta);
            if !r.is_finite() {
                break;
            }
            if r.abs() <= tol {
                return Ok(interval(delta, p, r, SolveMethod::Newton, iterations));
            }
            let next = delta - r / dg(delta);
            iterations += 1;
            if !(next.is_finite() && next > 0.0) {
                break;
            }
            delta = next;
        }
    }

    let (d, r, k) = bisect_increasing(
        &g,
        if start.is_finite() && start > 0.0 {
            start
        } else {
            1.0
        },
        tol,
    )?;
    Ok(interval(d, p, r, SolveMethod::Bisection, iterations + k))
}

/// Root of a strictly increasing `g`, bracket grown geometrically from `guess`.
fn bisect_increasing(g: &dyn Fn(f64) -> f64, guess: f64, tol: f64) -> Result<(f64, f64, u32)> {
    let mut lo = guess;
    let mut hi = guess;
    let mut grow = 0;
    while !(g(lo) < 0.0) {
        lo *= 0.5;
        grow += 1;
        if grow > 4000 || lo == 0.0 {
            return Err(Error::Numerical(format!(
                "could not bracket root from below, last lo = {lo:e}"
            )));
        }
    }
    grow = 0;
    while !(g(hi) > 0.0) {
        hi *= 2.0;
        grow += 1;
        if grow > 4000 || !hi.is_finite() {
            return Err(Error::Numerical(format!(
                "could not bracket root from above, last hi = {hi:e}"
            )));
        }
    }
    for k in 0..2000u32 {
        let mid = 0.5 * (lo + hi);
        let r = g(mid);
        if r.abs() <= tol || mid <= lo || mid >= hi {
            if r.abs() <= tol {
                return Ok((mid, r, k + 1));
            }
            break;
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numerical(format!(
        "first-order condition did not converge; final bracket [{lo:e}, {hi:e}]"
    )))
}

/// Sensitivities of the closed-form `delta*`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormStatics {
    pub d_spread: f64,
    pub d_kappa: f64,
    pub d_hurst: f64,
    /// With respect to the path dimension `D = 2 - H`.
    pub d_dimension: f64,
}

/// Log-derivative partials of `delta*`.
///
/// `d ln delta*/dH = -(ln s - ln kappa - ln(1-H))/H^2 + 1/(H(1-H))`.
pub fn statics_closed_form(p: &StochasticParams) -> Result<ClosedFormStatics> {
    let star = delta_star_closed_form(p)?.delta_star;
    let h = p.hurst;
    let log_ratio = p.spread.ln() - p.kappa.ln() - (1.0 - h).ln();
    let d_hurst = star * (-log_ratio / (h * h) + 1.0 / (h * (1.0 - h)));
    Ok(ClosedFormStatics {
        d_spread: star / (h * p.spread),
        d_kappa: -star / (h * p.kappa),
        d_hurst,
        d_dimension: -d_hurst,
    })
}
