//! Deterministic dyadic profit model.
//!
//! At resolution `m` the horizon `T` is split into `n = 2^m` intervals of
//! length `T / 2^m`. Each interval is a right triangle whose hypotenuse is the
//! chord `T / 2^m` and whose legs are the exploitable move `Phi_m` and the
//! microstructure term `W^m c0`:
//!
//! ```text
//! Phi_m = sqrt(T^2 / 4^m - W^(2m) c0^2)          (feasible iff T/2^m > W^m c0)
//! R_m   = 2^m (Phi_m - s) - L(m)
//! ```
//!
//! The optimal level is the first `m` whose forward difference
//! `R_{m+1} - R_m` is nonpositive, provided the difference sequence is
//! nonincreasing. [`optimize_deterministic`] verifies that premise and falls
//! back to an exhaustive scan when it does not hold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laziness::LazinessSpec;

/// Hard cap on the level scan when every level is feasible (`W <= 1/2`).
pub const DEFAULT_LEVEL_CAP: u32 = 30;

/// Largest cap accepted; beyond this `2^m` loses integer exactness in `f64`.
pub const MAX_LEVEL_CAP: u32 = 52;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeterministicParams {
    /// Horizon `T`.
    pub horizon: f64,
    /// Roughness scale factor `W`.
    pub roughness: f64,
    /// Microstructure amplitude `c0`.
    pub micro: f64,
    /// Effective spread per trade.
    pub spread: f64,
    pub laziness: LazinessSpec,
    #[serde(default = "default_cap")]
    pub level_cap: u32,
}

fn default_cap() -> u32 {
    DEFAULT_LEVEL_CAP
}

impl DeterministicParams {
    pub fn new(
        horizon: f64,
        roughness: f64,
        micro: f64,
        spread: f64,
        laziness: LazinessSpec,
    ) -> Result<Self> {
        let p = DeterministicParams {
            horizon,
            roughness,
            micro,
            spread,
            laziness,
            level_cap: DEFAULT_LEVEL_CAP,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_level_cap(mut self, cap: u32) -> Result<Self> {
        self.level_cap = cap;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        positive("horizon", self.horizon)?;
        positive("roughness", self.roughness)?;
        if !(self.micro.is_finite() && self.micro >= 0.0) {
            return Err(Error::invalid(
                "micro",
                format!("must be finite and >= 0, got {}", self.micro),
            ));
        }
        if !(self.spread.is_finite() && self.spread >= 0.0) {
            return Err(Error::invalid(
                "spread",
                format!("must be finite and >= 0, got {}", self.spread),
            ));
        }
        if self.level_cap > MAX_LEVEL_CAP {
            return Err(Error::invalid(
                "level-cap",
                format!("must be <= {MAX_LEVEL_CAP}, got {}", self.level_cap),
            ));
        }
        self.laziness.validate()
    }

    /// Chord length `T / 2^m` and microstructure leg `W^m c0` at level `m`.
    fn legs(&self, m: u32) -> (f64, f64) {
        let chord = self.horizon * (-(m as f64)).exp2();
        let micro = self.roughness.powi(m as i32) * self.micro;
        (chord, micro)
    }

    /// Strict feasibility `T / 2^m > W^m c0`.
    pub fn is_feasible(&self, m: u32) -> bool {
        let (chord, micro) = self.legs(m);
        chord > micro
    }
}

pub(crate) fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

/// Upper end of the feasible level set `{0, ..., m_max}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "level", rename_all = "kebab-case")]
pub enum LevelBound {
    /// Feasibility fails at `m + 1`.
    Feasible(u32),
    /// Every scanned level was feasible; the scan stopped at the cap.
    Capped(u32),
}

impl LevelBound {
    pub fn level(self) -> u32 {
        match self {
            LevelBound::Feasible(m) | LevelBound::Capped(m) => m,
        }
    }
}

/// Exploitable mean move `Phi_m` per interval.
pub fn phi(m: u32, p: &DeterministicParams) -> Result<f64> {
    let (chord, micro) = p.legs(m);
    if !(chord > micro) {
        return Err(Error::Domain(format!(
            "level {m} is infeasible: T/2^m = {chord:e} is not greater than W^m c0 = {micro:e}"
        )));
    }
    // (a - b)(a + b) stays positive whenever a > b, unlike a^2 - b^2.
    Ok(((chord - micro) * (chord + micro)).sqrt())
}

/// Largest feasible level by linear scan, or `None` if `m = 0` is infeasible.
pub fn feasible_m_max(p: &DeterministicParams) -> Option<LevelBound> {
    if !p.is_feasible(0) {
        return None;
    }
    let mut m = 0;
    while m < p.level_cap {
        if !p.is_feasible(m + 1) {
            return Some(LevelBound::Feasible(m));
        }
        m += 1;
    }
    Some(LevelBound::Capped(p.level_cap))
}

/// Gross gain `A_m = 2^m Phi_m` before costs.
pub fn gross_gain(m: u32, p: &DeterministicParams) -> Result<f64> {
    Ok((m as f64).exp2() * phi(m, p)?)
}

/// Total profit `R_m = 2^m (Phi_m - s) - L(m)`.
pub fn profit_deterministic(m: u32, p: &DeterministicParams) -> Result<f64> {
    let n = (m as f64).exp2();
    Ok(n * (phi(m, p)? - p.spread) - p.laziness.at_level(m))
}

/// Forward difference `R_{m+1} - R_m`, evaluated in factored form.
pub fn forward_difference(m: u32, p: &DeterministicParams) -> Result<f64> {
    let n = (m as f64).exp2();
    let here = phi(m, p)?;
    let next = phi(m + 1, p)?;
    let d_lazy = p.laziness.at_level(m + 1) - p.laziness.at_level(m);
    Ok(n * (2.0 * next - here - p.spread) - d_lazy)
}

/// How the range of a [`ProfitCurve`] was chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveBound {
    /// `m_max` is the last feasible level.
    Feasibility,
    /// All levels were feasible and `m_max` is the scan cap.
    Cap,
    /// The caller supplied the level range.
    Range,
}

/// How `m_star` was located.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArgmaxMethod {
    /// First level with a nonpositive forward difference.
    StoppingRule,
    /// Full scan; the forward differences were not monotone.
    ExhaustiveNonUnimodal,
    /// Full scan over a caller-supplied curve.
    Exhaustive,
}

/// Profit by dyadic level over a consecutive range of levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfitCurve {
    pub levels: Vec<u32>,
    pub profits: Vec<f64>,
    pub m_max: u32,
    pub m_star: Option<u32>,
    pub bound: CurveBound,
    pub argmax: ArgmaxMethod,
}

impl ProfitCurve {
    /// Curve over `first, first+1, ...` with `m_star` set by exhaustive scan
    /// (smallest level wins ties).
    pub fn from_profits(first: u32, profits: Vec<f64>) -> Self {
        let levels: Vec<u32> = (first..first + profits.len() as u32).collect();
        let m_star = argmax_index(&profits).map(|i| levels[i]);
        ProfitCurve {
            m_max: levels.last().copied().unwrap_or(first),
            levels,
            profits,
            m_star,
            bound: CurveBound::Range,
            argmax: ArgmaxMethod::Exhaustive,
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn profit_at(&self, m: u32) -> Option<f64> {
        let first = *self.levels.first()?;
        self.profits.get(m.checked_sub(first)? as usize).copied()
    }

    pub fn max_profit(&self) -> Option<f64> {
        self.m_star.and_then(|m| self.profit_at(m))
    }

    /// The maximum lies strictly inside the level range.
    pub fn has_interior_max(&self) -> bool {
        match (self.m_star, self.levels.first(), self.levels.last()) {
            (Some(m), Some(&lo), Some(&hi)) => m > lo && m < hi,
            _ => false,
        }
    }
}

pub(crate) fn argmax_index(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if !(v > values[b]) => {}
            _ if v.is_nan() => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Evaluates `R_m` over the feasible set and locates the optimal level.
pub fn optimize_deterministic(p: &DeterministicParams) -> Result<ProfitCurve> {
    let bound = feasible_m_max(p).ok_or_else(|| {
        Error::Domain(format!(
            "no feasible level: T = {} is not greater than c0 = {}",
            p.horizon, p.micro
        ))
    })?;
    let m_max = bound.level();
    let profits = (0..=m_max)
        .map(|m| profit_deterministic(m, p))
        .collect::<Result<Vec<_>>>()?;
    let diffs = (0..m_max)
        .map(|m| forward_difference(m, p))
        .collect::<Result<Vec<_>>>()?;

    let (m_star, argmax) = locate_optimum(&profits, &diffs);

    Ok(ProfitCurve {
        levels: (0..=m_max).collect(),
        profits,
        m_max,
        m_star: Some(m_star),
        bound: match bound {
            LevelBound::Feasible(_) => CurveBound::Feasibility,
            LevelBound::Capped(_) => CurveBound::Cap,
        },
        argmax,
    })
}

/// Stopping rule when `diffs` is nonincreasing, exhaustive argmax otherwise.
fn locate_optimum(profits: &[f64], diffs: &[f64]) -> (u32, ArgmaxMethod) {
    let m_max = diffs.len() as u32;
    if diffs.windows(2).all(|w| w[1] <= w[0]) {
        let m = diffs
            .iter()
            .position(|&d| d <= 0.0)
            .map_or(m_max, |i| i as u32);
        (m, ArgmaxMethod::StoppingRule)
    } else {
        let i = argmax_index(profits).unwrap_or(0);
        (i as u32, ArgmaxMethod::ExhaustiveNonUnimodal)
    }
}

/// Partial derivatives of `R_m` with respect to the model parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeterministicStatics {
    pub d_spread: f64,
    pub d_micro: f64,
    pub d_roughness: f64,
}

/// Closed-form partials of `R_m` in `s`, `c0` and `W` at a feasible level.
///
/// `dR/dW` carries the chain-rule factor `m` from `d(W^(2m))/dW`, so it
/// vanishes at `m = 0`.
pub fn statics_deterministic(m: u32, p: &DeterministicParams) -> Result<DeterministicStatics> {
    let phi_m = phi(m, p)?;
    let n = (m as f64).exp2();
    let w2m = p.roughness.powi(2 * m as i32);
    let d_micro = -n * w2m * p.micro / phi_m;
    let d_roughness = if m == 0 {
        0.0
    } else {
        -n * m as f64 * p.roughness.powi(2 * m as i32 - 1) * p.micro * p.micro / phi_m
    };
    Ok(DeterministicStatics {
        d_spread: -n,
        d_micro,
        d_roughness,
    })
}

/// Whether `A_{m+2} - 2 A_{m+1} + A_m < 0` holds across `0..=m_max`.
pub fn gain_is_discretely_concave(p: &DeterministicParams, m_max: u32) -> Result<bool> {
    let gains = (0..=m_max)
        .map(|m| gross_gain(m, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(gains.windows(3).all(|w| w[2] - 2.0 * w[1] + w[0] < 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t: f64, w: f64, c0: f64, s: f64, l: LazinessSpec) -> DeterministicParams {
        DeterministicParams::new(t, w, c0, s, l).unwrap()
    }

    #[test]
    fn phi_three_four_five() {
        let p = params(1.0, 0.5, 0.6, 0.0, LazinessSpec::none());
        assert!((phi(0, &p).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn phi_without_microstructure_is_chord() {
        let p = params(3.0, 0.9, 0.0, 0.0, LazinessSpec::none());
        for m in 0..20 {
            assert_eq!(phi(m, &p).unwrap(), 3.0 / (m as f64).exp2());
        }
    }

    #[test]
    fn phi_level_one() {
        // sqrt(0.25 - 0.64 * 0.36) = sqrt(0.0196)
        let p = params(1.0, 0.8, 0.6, 0.0, LazinessSpec::none());
        assert!((phi(1, &p).unwrap() - 0.14).abs() < 1e-14);
    }

    #[test]
    fn phi_infeasible_names_level() {
        let p = params(1.0, 0.8, 0.6, 0.0, LazinessSpec::none());
        let e = phi(2, &p).unwrap_err();
        assert!(
            matches!(e, Error::Domain(ref s) if s.contains("level 2")),
            "{e}"
        );
    }

    #[test]
    fn equality_is_infeasible() {
        let p = params(1.0, 1.0, 1.0, 0.0, LazinessSpec::none());
        assert!(!p.is_feasible(0));
        assert!(phi(0, &p).is_err());
    }

    #[test]
    fn m_max_examples() {
        let p = params(1.0, 0.8, 0.6, 0.0, LazinessSpec::none());
        assert_eq!(feasible_m_max(&p), Some(LevelBound::Feasible(1)));
        let p = params(1.0, 1.0, 2.0, 0.0, LazinessSpec::none());
        assert_eq!(feasible_m_max(&p), None);
        let p = params(1.0, 0.4, 0.5, 0.0, LazinessSpec::none());
        assert_eq!(
            feasible_m_max(&p),
            Some(LevelBound::Capped(DEFAULT_LEVEL_CAP))
        );
        let p = p.with_level_cap(7).unwrap();
        assert_eq!(feasible_m_max(&p), Some(LevelBound::Capped(7)));
    }

    #[test]
    fn profit_examples() {
        let p = params(1.0, 0.7, 0.0, 0.0, LazinessSpec::none());
        assert_eq!(profit_deterministic(0, &p).unwrap(), 1.0);
        let p = params(1.0, 0.5, 0.6, 0.1, LazinessSpec::constant(0.05));
        assert!((profit_deterministic(0, &p).unwrap() - 0.65).abs() < 1e-14);
        let p = params(1.0, 0.8, 0.6, 0.0, LazinessSpec::none());
        assert!(profit_deterministic(5, &p).is_err());
    }

    #[test]
    fn forward_difference_examples() {
        let p = params(1.0, 0.9, 0.0, 0.0, LazinessSpec::none());
        for m in 0..10 {
            assert_eq!(forward_difference(m, &p).unwrap(), 0.0);
        }
        // phi(1) = sqrt(0.25 - 0.09) = 0.4, so 2 * 0.4 - 0.8 = 0
        let p = params(1.0, 0.5, 0.6, 0.0, LazinessSpec::none());
        let d = forward_difference(0, &p).unwrap();
        let brute = profit_deterministic(1, &p).unwrap() - profit_deterministic(0, &p).unwrap();
        assert!(d.abs() < 1e-15 && brute.abs() < 1e-15);
        let p = params(1.0, 0.8, 0.6, 0.0, LazinessSpec::none());
        assert!(forward_difference(1, &p).is_err());
    }

    #[test]
    fn stops_at_zero_when_first_difference_nonpositive() {
        let p = params(1.0, 0.45, 0.3, 0.5, LazinessSpec::constant(0.01));
        assert!(forward_difference(0, &p).unwrap() <= 0.0);
        let c = optimize_deterministic(&p).unwrap();
        assert_eq!(c.m_star, Some(0));
        assert_eq!(c.argmax, ArgmaxMethod::StoppingRule);
    }

    #[test]
    fn boundary_optimum_when_all_differences_positive() {
        // W < 1/2: A_m increases toward T; with no costs every step gains.
        let p = params(1.0, 0.3, 0.5, 0.0, LazinessSpec::none())
            .with_level_cap(12)
            .unwrap();
        let c = optimize_deterministic(&p).unwrap();
        assert!((0..12).all(|m| forward_difference(m, &p).unwrap() > 0.0));
        assert_eq!(c.m_star, Some(12));
        assert_eq!(c.bound, CurveBound::Cap);
    }

    #[test]
    fn interior_optimum_with_costs() {
        let p = params(
            1.0,
            0.45,
            0.9,
            1e-3,
            LazinessSpec::power_of_two_level(0.0, 1e-4, 1.2),
        );
        let c = optimize_deterministic(&p).unwrap();
        assert!(c.has_interior_max(), "{c:?}");
        let brute = argmax_index(&c.profits).unwrap() as u32;
        assert_eq!(c.m_star, Some(brute));
        assert_eq!(c.m_star, Some(5));
        assert_eq!(c.argmax, ArgmaxMethod::StoppingRule);
    }

    #[test]
    fn no_feasible_level_is_an_error() {
        let p = params(1.0, 1.0, 2.0, 0.0, LazinessSpec::none());
        assert!(matches!(optimize_deterministic(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn non_monotone_differences_fall_back_to_scan() {
        // Two humps: the stopping rule would stop at 1, the true max is 3.
        let profits = [0.0, 1.0, 0.5, 2.0, 1.0];
        let diffs: Vec<f64> = profits.windows(2).map(|w| w[1] - w[0]).collect();
        assert_eq!(
            locate_optimum(&profits, &diffs),
            (3, ArgmaxMethod::ExhaustiveNonUnimodal)
        );
        let profits = [0.0, 1.0, 1.5, 1.5, 1.0];
        let diffs: Vec<f64> = profits.windows(2).map(|w| w[1] - w[0]).collect();
        assert_eq!(
            locate_optimum(&profits, &diffs),
            (2, ArgmaxMethod::StoppingRule)
        );
    }

    #[test]
    fn round_off_near_half_roughness_still_finds_max() {
        let p = params(1.0, 0.4999999, 0.5, 0.0, LazinessSpec::none());
        let c = optimize_deterministic(&p).unwrap();
        let brute = argmax_index(&c.profits).unwrap() as u32;
        if c.argmax == ArgmaxMethod::ExhaustiveNonUnimodal {
            assert_eq!(c.m_star, Some(brute));
        } else {
            assert_eq!(c.profit_at(c.m_star.unwrap()), c.profit_at(brute));
        }
    }

    #[test]
    fn spread_partial_is_exact() {
        let p = params(2.0, 0.4, 0.7, 0.01, LazinessSpec::none());
        for m in 0..8 {
            assert_eq!(
                statics_deterministic(m, &p).unwrap().d_spread,
                -(m as f64).exp2()
            );
        }
    }

    #[test]
    fn zero_micro_partials_vanish() {
        let p = params(2.0, 0.4, 0.0, 0.01, LazinessSpec::none());
        let s = statics_deterministic(3, &p).unwrap();
        assert_eq!(s.d_micro, 0.0);
        assert_eq!(s.d_roughness, 0.0);
    }

    #[test]
    fn partials_match_central_differences() {
        let p = params(
            1.5,
            0.45,
            0.8,
            0.002,
            LazinessSpec::power_of_two_level(0.0, 1e-4, 1.3),
        );
        for m in 1..10 {
            let s = statics_deterministic(m, &p).unwrap();
            let fd = |f: &dyn Fn(f64) -> DeterministicParams, x: f64| {
                let h = 1e-6 * x.abs().max(1e-3);
                (profit_deterministic(m, &f(x + h)).unwrap()
                    - profit_deterministic(m, &f(x - h)).unwrap())
                    / (2.0 * h)
            };
            let dc = fd(&|x| DeterministicParams { micro: x, ..p }, p.micro);
            let dw = fd(&|x| DeterministicParams { roughness: x, ..p }, p.roughness);
            assert!(
                (dc - s.d_micro).abs() <= 1e-5 * s.d_micro.abs(),
                "m={m} c0: {dc} vs {}",
                s.d_micro
            );
            assert!(
                (dw - s.d_roughness).abs() <= 1e-5 * s.d_roughness.abs(),
                "m={m} W: {dw} vs {}",
                s.d_roughness
            );
        }
    }
}
