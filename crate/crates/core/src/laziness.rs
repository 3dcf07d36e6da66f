//! Cumulative laziness (decision/latency) cost models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LazinessMode {
    /// `L = L0` at every level.
    Constant,
    /// `L(m) = L0 + lambda * 2^(alpha m)`.
    PowerOfTwoLevel,
    /// `L(n) = lambda * n^alpha` with `n = T / delta` trades.
    PowerOfTradeCount,
}

impl std::str::FromStr for LazinessMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(LazinessMode::Constant),
            "power-of-two-level" | "level" => Ok(LazinessMode::PowerOfTwoLevel),
            "power-of-trade-count" | "trade-count" => Ok(LazinessMode::PowerOfTradeCount),
            other => Err(Error::invalid(
                "laziness-mode",
                format!(
                    "unknown mode `{other}` (constant, power-of-two-level, power-of-trade-count)"
                ),
            )),
        }
    }
}

/// Total laziness cost as a function of trading resolution.
///
/// `base` is ignored in [`LazinessMode::PowerOfTradeCount`]; `scale` and
/// `exponent` are ignored in [`LazinessMode::Constant`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LazinessSpec {
    pub base: f64,
    pub scale: f64,
    pub exponent: f64,
    pub mode: LazinessMode,
}

impl LazinessSpec {
    pub fn none() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(base: f64) -> Self {
        LazinessSpec {
            base,
            scale: 0.0,
            exponent: 1.0,
            mode: LazinessMode::Constant,
        }
    }

    pub fn power_of_two_level(base: f64, scale: f64, exponent: f64) -> Self {
        LazinessSpec {
            base,
            scale,
            exponent,
            mode: LazinessMode::PowerOfTwoLevel,
        }
    }

    pub fn power_of_trade_count(scale: f64, exponent: f64) -> Self {
        LazinessSpec {
            base: 0.0,
            scale,
            exponent,
            mode: LazinessMode::PowerOfTradeCount,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base.is_finite() && self.base >= 0.0) {
            return Err(Error::invalid(
                "laziness-base",
                format!("must be finite and >= 0, got {}", self.base),
            ));
        }
        if !(self.scale.is_finite() && self.scale >= 0.0) {
            return Err(Error::invalid(
                "laziness-scale",
                format!("must be finite and >= 0, got {}", self.scale),
            ));
        }
        if !(self.exponent.is_finite() && self.exponent >= 1.0) {
            return Err(Error::invalid(
                "laziness-exponent",
                format!("must be finite and >= 1, got {}", self.exponent),
            ));
        }
        Ok(())
    }

    /// True when the cost does not vary with trading frequency.
    pub fn is_constant(&self) -> bool {
        self.mode == LazinessMode::Constant || self.scale == 0.0
    }

    /// Cost at dyadic level `m`, i.e. with `n = 2^m` trades.
    pub fn at_level(&self, m: u32) -> f64 {
        match self.mode {
            LazinessMode::Constant => self.base,
            LazinessMode::PowerOfTwoLevel => {
                self.base + self.scale * (self.exponent * m as f64).exp2()
            }
            LazinessMode::PowerOfTradeCount => self.scale * (self.exponent * m as f64).exp2(),
        }
    }

    /// Cost for a (possibly non-integer) trade count `n`.
    ///
    /// For the level mode this reads `2^(alpha m)` as `n^alpha`, which is exact
    /// on the dyadic grid.
    pub fn at_trade_count(&self, n: f64) -> f64 {
        match self.mode {
            LazinessMode::Constant => self.base,
            LazinessMode::PowerOfTwoLevel => self.base + self.scale * n.powf(self.exponent),
            LazinessMode::PowerOfTradeCount => self.scale * n.powf(self.exponent),
        }
    }
}

impl Default for LazinessSpec {
    fn default() -> Self {
        Self::none()
    }
}
