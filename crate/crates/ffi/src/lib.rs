//! C ABI over the `tradefreq` library.
//!
//! Every fallible function returns a [`TfStatus`]; on failure the message is
//! available from [`tf_last_error_message`] on the same thread. Heap objects
//! are opaque handles released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tradefreq::fbm::{sample_path, FbmConfig, FbmMethod, FbmPath};
use tradefreq::hurst::{default_levels, fit_scaling, HurstFit, PricePath};
use tradefreq::laziness::{LazinessMode, LazinessSpec};
use tradefreq::model::{optimize_deterministic, ArgmaxMethod, DeterministicParams, ProfitCurve};
use tradefreq::stochastic::{
    delta_star_closed_form, expected_profit_curve, solve_foc_latency, OptimalInterval, SolveMethod,
    StochasticParams,
};
use tradefreq::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TfStatus {
    Ok = 0,
    InvalidParameter = 1,
    Domain = 2,
    Capability = 3,
    Estimation = 4,
    Numerical = 5,
    Parse = 6,
    Io = 7,
    Format = 8,
    NullPointer = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

impl From<&Error> for TfStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter { .. } => TfStatus::InvalidParameter,
            Error::Domain(_) => TfStatus::Domain,
            Error::Capability(_) => TfStatus::Capability,
            Error::Estimation(_) => TfStatus::Estimation,
            Error::Numerical(_) => TfStatus::Numerical,
            Error::Parse { .. } => TfStatus::Parse,
            Error::Io { .. } => TfStatus::Io,
            Error::Format(_) => TfStatus::Format,
        }
    }
}

/// `mode`: 0 constant, 1 power-of-two-level, 2 power-of-trade-count.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct TfLaziness {
    pub mode: u32,
    pub base: f64,
    pub scale: f64,
    pub exponent: f64,
}

/// `method`: 0 closed form, 1 Newton, 2 bisection.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct TfOptimalInterval {
    pub delta_star: f64,
    pub n_star: f64,
    pub m_star_rounded: u32,
    pub foc_residual: f64,
    pub second_order_value: f64,
    pub second_order_analytic: f64,
    pub method: u32,
    pub iterations: u32,
}

/// Opaque dyadic profit curve.
pub struct TfProfitCurve(ProfitCurve);

/// Opaque simulated path.
pub struct TfFbmPath(FbmPath);

/// Opaque scaling-regression fit.
pub struct TfHurstFit(HurstFit);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), TfStatus>) -> TfStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TfStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            TfStatus::Panic
        }
    }
}

fn fail(e: Error) -> TfStatus {
    set_error(&e.to_string());
    TfStatus::from(&e)
}

fn null(what: &str) -> TfStatus {
    set_error(&format!("null pointer: {what}"));
    TfStatus::NullPointer
}

unsafe fn laziness(l: *const TfLaziness) -> Result<LazinessSpec, TfStatus> {
    let Some(l) = l.as_ref() else {
        return Ok(LazinessSpec::none());
    };
    let mode = match l.mode {
        0 => LazinessMode::Constant,
        1 => LazinessMode::PowerOfTwoLevel,
        2 => LazinessMode::PowerOfTradeCount,
        m => {
            set_error(&format!("unknown laziness mode {m}"));
            return Err(TfStatus::InvalidParameter);
        }
    };
    Ok(LazinessSpec {
        mode,
        base: l.base,
        scale: l.scale,
        exponent: l.exponent,
    })
}

fn interval(o: &OptimalInterval) -> TfOptimalInterval {
    TfOptimalInterval {
        delta_star: o.delta_star,
        n_star: o.n_star,
        m_star_rounded: o.m_star_rounded,
        foc_residual: o.foc_residual,
        second_order_value: o.second_order_value,
        second_order_analytic: o.second_order_analytic,
        method: match o.method {
            SolveMethod::ClosedForm => 0,
            SolveMethod::Newton => 1,
            SolveMethod::Bisection => 2,
        },
        iterations: o.iterations,
    }
}

unsafe fn copy_out<T: Copy>(src: &[T], dst: *mut T, cap: usize) -> Result<(), TfStatus> {
    if dst.is_null() {
        return Err(null("output buffer"));
    }
    if cap < src.len() {
        set_error(&format!("buffer holds {cap} elements, need {}", src.len()));
        return Err(TfStatus::BufferTooSmall);
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

/// Message of the last failed call on this thread; empty after success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn tf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frictionless closed-form optimal interval.
///
/// # Safety
/// `out` must be null or point to writable memory for one `TfOptimalInterval`.
#[no_mangle]
pub unsafe extern "C" fn tf_delta_star_closed_form(
    hurst: f64,
    kappa: f64,
    spread: f64,
    horizon: f64,
    out: *mut TfOptimalInterval,
) -> TfStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let p = StochasticParams::new(hurst, kappa, spread, horizon, LazinessSpec::none())
            .map_err(fail)?;
        *out = interval(&delta_star_closed_form(&p).map_err(fail)?);
        Ok(())
    })
}

/// Optimal interval with laziness cost; a null `laziness` means none.
///
/// # Safety
/// `laziness` must be null or valid for reads; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_solve_foc_latency(
    hurst: f64,
    kappa: f64,
    spread: f64,
    horizon: f64,
    laziness_spec: *const TfLaziness,
    out: *mut TfOptimalInterval,
) -> TfStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let p = StochasticParams::new(hurst, kappa, spread, horizon, laziness(laziness_spec)?)
            .map_err(fail)?;
        *out = interval(&solve_foc_latency(&p).map_err(fail)?);
        Ok(())
    })
}

/// Deterministic dyadic profit curve; `level_cap = 0` keeps the default cap.
///
/// # Safety
/// `laziness` must be null or valid for reads; `out` must be valid for writes.
/// On success `*out` owns a curve to release with [`tf_profit_curve_free`].
#[no_mangle]
pub unsafe extern "C" fn tf_optimize_deterministic(
    horizon: f64,
    roughness: f64,
    micro: f64,
    spread: f64,
    laziness_spec: *const TfLaziness,
    level_cap: u32,
    out: *mut *mut TfProfitCurve,
) -> TfStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let mut p =
            DeterministicParams::new(horizon, roughness, micro, spread, laziness(laziness_spec)?)
                .map_err(fail)?;
        if level_cap > 0 {
            p = p.with_level_cap(level_cap).map_err(fail)?;
        }
        let curve = optimize_deterministic(&p).map_err(fail)?;
        *out = Box::into_raw(Box::new(TfProfitCurve(curve)));
        Ok(())
    })
}

/// Expected fBM profit on the dyadic grid `m_lo..=m_hi`.
///
/// # Safety
/// As for [`tf_optimize_deterministic`].
#[no_mangle]
pub unsafe extern "C" fn tf_expected_profit_curve(
    hurst: f64,
    kappa: f64,
    spread: f64,
    horizon: f64,
    laziness_spec: *const TfLaziness,
    m_lo: u32,
    m_hi: u32,
    out: *mut *mut TfProfitCurve,
) -> TfStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        if m_lo > m_hi || m_hi > 63 {
            set_error(&format!("invalid level range {m_lo}..={m_hi}"));
            return Err(TfStatus::InvalidParameter);
        }
        let p = StochasticParams::new(hurst, kappa, spread, horizon, laziness(laziness_spec)?)
            .map_err(fail)?;
        *out = Box::into_raw(Box::new(TfProfitCurve(expected_profit_curve(
            &p, m_lo, m_hi,
        ))));
        Ok(())
    })
}

/// Number of levels in the curve (0 for a null handle).
///
/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tf_profit_curve_len(curve: *const TfProfitCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.len())
}

/// Profit-maximizing level and how it was found (0 stopping rule,
/// 1 exhaustive after a non-unimodal curve, 2 exhaustive).
///
/// # Safety
/// `curve` must be a live handle; outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_profit_curve_m_star(
    curve: *const TfProfitCurve,
    m_star: *mut u32,
    method: *mut u32,
) -> TfStatus {
    guard(|| {
        let c = &curve.as_ref().ok_or_else(|| null("curve"))?.0;
        let m = m_star.as_mut().ok_or_else(|| null("m_star"))?;
        *m = c.m_star.ok_or_else(|| {
            set_error("empty curve");
            TfStatus::Domain
        })?;
        if let Some(k) = method.as_mut() {
            *k = match c.argmax {
                ArgmaxMethod::StoppingRule => 0,
                ArgmaxMethod::ExhaustiveNonUnimodal => 1,
                ArgmaxMethod::Exhaustive => 2,
            };
        }
        Ok(())
    })
}

/// Copies levels and profits into caller buffers of capacity `cap`.
///
/// # Safety
/// `curve` must be a live handle; buffers must hold `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn tf_profit_curve_copy(
    curve: *const TfProfitCurve,
    levels: *mut u32,
    profits: *mut f64,
    cap: usize,
) -> TfStatus {
    guard(|| {
        let c = &curve.as_ref().ok_or_else(|| null("curve"))?.0;
        copy_out(&c.levels, levels, cap)?;
        copy_out(&c.profits, profits, cap)
    })
}

/// # Safety
/// `curve` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tf_profit_curve_free(curve: *mut TfProfitCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Samples an fBM path with `n_steps + 1` points; `method` 0 circulant,
/// 1 Cholesky.
///
/// # Safety
/// `out` must be valid for writes; release the handle with [`tf_fbm_path_free`].
#[no_mangle]
pub unsafe extern "C" fn tf_fbm_sample(
    hurst: f64,
    sigma: f64,
    n_steps: usize,
    horizon: f64,
    method: u32,
    seed: u64,
    out: *mut *mut TfFbmPath,
) -> TfStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let method = match method {
            0 => FbmMethod::Circulant,
            1 => FbmMethod::Cholesky,
            m => {
                set_error(&format!("unknown sampler {m}"));
                return Err(TfStatus::InvalidParameter);
            }
        };
        let cfg = FbmConfig {
            hurst,
            sigma,
            drift: 0.0,
            n_steps,
            horizon,
            method,
            seed,
        };
        *out = Box::into_raw(Box::new(TfFbmPath(sample_path(&cfg).map_err(fail)?)));
        Ok(())
    })
}

/// Number of points in the path (0 for a null handle).
///
/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tf_fbm_path_len(path: *const TfFbmPath) -> usize {
    path.as_ref().map_or(0, |p| p.0.values.len())
}

/// # Safety
/// `path` must be a live handle; buffers must hold `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn tf_fbm_path_copy(
    path: *const TfFbmPath,
    times: *mut f64,
    values: *mut f64,
    cap: usize,
) -> TfStatus {
    guard(|| {
        let p = &path.as_ref().ok_or_else(|| null("path"))?.0;
        copy_out(&p.times, times, cap)?;
        copy_out(&p.values, values, cap)
    })
}

/// # Safety
/// `path` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tf_fbm_path_free(path: *mut TfFbmPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Scaling regression on a uniformly sampled log-price series; `levels = 0`
/// picks the default number of lags.
///
/// # Safety
/// `log_prices` must hold `len` readable values; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_fit_scaling(
    log_prices: *const f64,
    len: usize,
    delta_t: f64,
    levels: u32,
    out: *mut *mut TfHurstFit,
) -> TfStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        if log_prices.is_null() {
            return Err(null("log_prices"));
        }
        let values = std::slice::from_raw_parts(log_prices, len).to_vec();
        let path = PricePath::uniform(values, delta_t).map_err(fail)?;
        let levels = if levels == 0 {
            default_levels(&path)
        } else {
            levels
        };
        *out = Box::into_raw(Box::new(TfHurstFit(
            fit_scaling(&path, levels).map_err(fail)?,
        )));
        Ok(())
    })
}

/// Fitted `H`, `kappa` and regression `R^2`; any output may be null.
///
/// # Safety
/// `fit` must be a live handle; non-null outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_hurst_fit_params(
    fit: *const TfHurstFit,
    hurst: *mut f64,
    kappa: *mut f64,
    r_squared: *mut f64,
) -> TfStatus {
    guard(|| {
        let f = &fit.as_ref().ok_or_else(|| null("fit"))?.0;
        if let Some(h) = hurst.as_mut() {
            *h = f.hurst;
        }
        if let Some(k) = kappa.as_mut() {
            *k = f.kappa;
        }
        if let Some(r) = r_squared.as_mut() {
            *r = f.r_squared;
        }
        Ok(())
    })
}

/// # Safety
/// `fit` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tf_hurst_fit_free(fit: *mut TfHurstFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}
