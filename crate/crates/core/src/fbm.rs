//! Fractional Brownian motion sample paths.
//!
//! Paths are `X_t = mu t + sigma B^H_t` on a uniform grid of `n` steps over
//! `[0, T]`. Both samplers produce unit-step fractional Gaussian noise (fGN)
//! with autocovariance
//!
//! ```text
//! gamma(k) = 1/2 (|k+1|^2H - 2|k|^2H + |k-1|^2H)
//! ```
//!
//! which is then scaled by `sigma (T/n)^H` and summed.
//!
//! * [`FbmMethod::Cholesky`] factors the `n x n` Toeplitz covariance directly
//!   (exact, `O(n^3)` setup, `O(n^2)` memory).
//! * [`FbmMethod::Circulant`] is Davies-Harte: embed `gamma` in a circulant of
//!   size `2n`, diagonalize it with one FFT, and colour complex white noise
//!   (exact in distribution, `O(n log n)` per path).
//!
//! Gaussian variates come from ChaCha20 seeded with the config seed through
//! `SeedableRng::seed_from_u64`, so a config always maps to the same path.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest grid the Cholesky sampler accepts.
pub const CHOLESKY_MAX_STEPS: usize = 4096;

/// Circulant eigenvalues in `[-EIGEN_TOLERANCE, 0)` are clamped to zero.
pub const EIGEN_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FbmMethod {
    Cholesky,
    Circulant,
}

impl std::str::FromStr for FbmMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cholesky" => Ok(FbmMethod::Cholesky),
            "circulant" | "davies-harte" => Ok(FbmMethod::Circulant),
            other => Err(Error::invalid(
                "method",
                format!("unknown method `{other}` (cholesky, circulant)"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FbmConfig {
    pub hurst: f64,
    pub sigma: f64,
    #[serde(default)]
    pub drift: f64,
    pub n_steps: usize,
    pub horizon: f64,
    pub method: FbmMethod,
    pub seed: u64,
}

impl FbmConfig {
    /// Unit-volatility, driftless path on `[0, 1]` using the circulant sampler.
    pub fn new(hurst: f64, n_steps: usize, seed: u64) -> Self {
        FbmConfig {
            hurst,
            sigma: 1.0,
            drift: 0.0,
            n_steps,
            horizon: 1.0,
            method: FbmMethod::Circulant,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_hurst(self.hurst)?;
        crate::model::positive("sigma", self.sigma)?;
        crate::model::positive("horizon", self.horizon)?;
        if !self.drift.is_finite() {
            return Err(Error::invalid("drift", "must be finite"));
        }
        if self.n_steps == 0 {
            return Err(Error::invalid("n-steps", "must be >= 1"));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }
}

pub(crate) fn check_hurst(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "hurst",
            format!("must lie in (0, 1), got {h}"),
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FbmPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub config: FbmConfig,
}

impl FbmPath {
    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// `E[B_t B_s] = 1/2 (t^2H + s^2H - |t-s|^2H)`.
pub fn fbm_covariance(t: f64, s: f64, hurst: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if !(t >= 0.0 && s >= 0.0) {
        return Err(Error::Domain(format!(
            "times must be nonnegative, got t={t}, s={s}"
        )));
    }
    let e = 2.0 * hurst;
    Ok(0.5 * (t.powf(e) + s.powf(e) - (t - s).abs().powf(e)))
}

/// Autocovariance of unit-step fGN at lag `k`.
pub fn fgn_autocovariance(k: usize, hurst: f64) -> Result<f64> {
    check_hurst(hurst)?;
    Ok(autocov(k, hurst))
}

fn autocov(k: usize, hurst: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let e = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).powf(e))
}

/// Eigenvalues of the size-`2n` circulant embedding of the fGN autocovariance.
///
/// Values within [`EIGEN_TOLERANCE`] below zero are clamped; anything more
/// negative is an error naming the worst eigenvalue.
pub fn circulant_eigenvalues(n: usize, hurst: f64) -> Result<Vec<f64>> {
    check_hurst(hurst)?;
    if n == 0 {
        return Err(Error::invalid("n-steps", "must be >= 1"));
    }
    let size = 2 * n;
    let mut row: Vec<Complex64> = (0..size)
        .map(|j| {
            let lag = if j <= n { j } else { size - j };
            Complex64::new(autocov(lag, hurst), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(size).process(&mut row);

    let (worst_idx, worst) =
        row.iter()
            .enumerate()
            .map(|(i, c)| (i, c.re))
            .fold(
                (0, f64::INFINITY),
                |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
            );
    if worst < -EIGEN_TOLERANCE {
        return Err(Error::Numerical(format!(
            "circulant embedding is not nonnegative definite: eigenvalue {worst_idx} = {worst:e} (n={n}, H={hurst})"
        )));
    }
    Ok(row.iter().map(|c| c.re.max(0.0)).collect())
}

enum Sampler {
    Cholesky {
        /// Row-major packed lower triangle.
        factor: Vec<f64>,
    },
    Circulant {
        scaled_sqrt_eigs: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
}

/// Unit-step fGN sampler with its factorization precomputed.
pub struct FgnSampler {
    n: usize,
    hurst: f64,
    sampler: Sampler,
}

impl std::fmt::Debug for FgnSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let method = match self.sampler {
            Sampler::Cholesky { .. } => "cholesky",
            Sampler::Circulant { .. } => "circulant",
        };
        f.debug_struct("FgnSampler")
            .field("n", &self.n)
            .field("hurst", &self.hurst)
            .field("method", &method)
            .finish()
    }
}

impl FgnSampler {
    pub fn new(n: usize, hurst: f64, method: FbmMethod) -> Result<Self> {
        check_hurst(hurst)?;
        if n == 0 {
            return Err(Error::invalid("n-steps", "must be >= 1"));
        }
        let sampler = match method {
            FbmMethod::Cholesky => {
                if n > CHOLESKY_MAX_STEPS {
                    return Err(Error::Capability(format!(
                        "cholesky sampler is limited to n <= {CHOLESKY_MAX_STEPS} steps (O(n^2) memory), \
                         got n = {n}; use the circulant method"
                    )));
                }
                Sampler::Cholesky {
                    factor: toeplitz_cholesky(n, hurst)?,
                }
            }
            FbmMethod::Circulant => {
                let eigs = circulant_eigenvalues(n, hurst)?;
                let size = (2 * n) as f64;
                Sampler::Circulant {
                    scaled_sqrt_eigs: eigs.iter().map(|l| (l / size).sqrt()).collect(),
                    fft: FftPlanner::new().plan_fft_forward(2 * n),
                }
            }
        };
        Ok(FgnSampler { n, hurst, sampler })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// `n` unit-step fGN values.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.sampler {
            Sampler::Cholesky { factor } => {
                let z: Vec<f64> = (0..self.n).map(|_| rng.sample(StandardNormal)).collect();
                (0..self.n)
                    .map(|i| {
                        let off = i * (i + 1) / 2;
                        dot(&factor[off..=off + i], &z[..=i])
                    })
                    .collect()
            }
            Sampler::Circulant {
                scaled_sqrt_eigs,
                fft,
            } => {
                // Real part of FFT(sqrt(lambda/2n) (Z1 + i Z2)) has covariance
                // exactly gamma on the first n coordinates.
                let mut buf: Vec<Complex64> = scaled_sqrt_eigs
                    .iter()
                    .map(|&s| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                buf[..self.n].iter().map(|c| c.re).collect()
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Cholesky factor of `[gamma(|i-j|)]`, packed row-major lower triangle.
fn toeplitz_cholesky(n: usize, hurst: f64) -> Result<Vec<f64>> {
    let gamma: Vec<f64> = (0..n).map(|k| autocov(k, hurst)).collect();
    let mut l = vec![0.0; n * (n + 1) / 2];
    for i in 0..n {
        let oi = i * (i + 1) / 2;
        for j in 0..=i {
            let oj = j * (j + 1) / 2;
            let s = gamma[i - j] - dot(&l[oi..oi + j], &l[oj..oj + j]);
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return Err(Error::Numerical(format!(
                        "cholesky factorization lost positive definiteness at row {i} (pivot {s:e}, n={n}, H={hurst}); \
                         add diagonal jitter or use the circulant method"
                    )));
                }
                l[oi + i] = s.sqrt();
            } else {
                l[oi + j] = s / l[oj + j];
            }
        }
    }
    Ok(l)
}

/// Path generator for a fixed config; paths differ only by seed.
#[derive(Debug)]
pub struct FbmGenerator {
    config: FbmConfig,
    sampler: FgnSampler,
}

impl FbmGenerator {
    pub fn new(config: FbmConfig) -> Result<Self> {
        config.validate()?;
        let sampler = FgnSampler::new(config.n_steps, config.hurst, config.method)?;
        Ok(FbmGenerator { config, sampler })
    }

    pub fn config(&self) -> &FbmConfig {
        &self.config
    }

    /// Grid increments `X_{t_{i+1}} - X_{t_i}` for the given seed.
    pub fn increments(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let dt = self.config.step();
        let scale = self.config.sigma * dt.powf(self.config.hurst);
        let drift = self.config.drift * dt;
        self.sampler
            .sample(&mut rng)
            .into_iter()
            .map(|g| drift + scale * g)
            .collect()
    }

    pub fn sample(&self, seed: u64) -> FbmPath {
        let n = self.config.n_steps;
        let dt = self.config.step();
        let times: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for d in self.increments(seed) {
            acc += d;
            values.push(acc);
        }
        FbmPath {
            times,
            values,
            config: FbmConfig {
                seed,
                ..self.config
            },
        }
    }
}

/// One seeded path for `cfg`.
pub fn sample_path(cfg: &FbmConfig) -> Result<FbmPath> {
    Ok(FbmGenerator::new(*cfg)?.sample(cfg.seed))
}
