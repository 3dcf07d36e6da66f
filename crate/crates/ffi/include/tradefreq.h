#ifndef TRADEFREQ_H
#define TRADEFREQ_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum TfStatus {
  TF_STATUS_OK = 0,
  TF_STATUS_INVALID_PARAMETER = 1,
  TF_STATUS_DOMAIN = 2,
  TF_STATUS_CAPABILITY = 3,
  TF_STATUS_ESTIMATION = 4,
  TF_STATUS_NUMERICAL = 5,
  TF_STATUS_PARSE = 6,
  TF_STATUS_IO = 7,
  TF_STATUS_FORMAT = 8,
  TF_STATUS_NULL_POINTER = 9,
  TF_STATUS_BUFFER_TOO_SMALL = 10,
  TF_STATUS_PANIC = 11,
} TfStatus;

/**
 * Opaque simulated path.
 */
typedef struct TfFbmPath TfFbmPath;

/**
 * Opaque scaling-regression fit.
 */
typedef struct TfHurstFit TfHurstFit;

/**
 * Opaque dyadic profit curve.
 */
typedef struct TfProfitCurve TfProfitCurve;

/**
 * `method`: 0 closed form, 1 Newton, 2 bisection.
 */
typedef struct TfOptimalInterval {
  double delta_star;
  double n_star;
  uint32_t m_star_rounded;
  double foc_residual;
  double second_order_value;
  double second_order_analytic;
  uint32_t method;
  uint32_t iterations;
} TfOptimalInterval;

/**
 * `mode`: 0 constant, 1 power-of-two-level, 2 power-of-trade-count.
 */
typedef struct TfLaziness {
  uint32_t mode;
  double base;
  double scale;
  double exponent;
} TfLaziness;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after success.
 * The pointer stays valid until the next call on this thread.
 */
const char *tf_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tf_version(void);

/**
 * Frictionless closed-form optimal interval.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `TfOptimalInterval`.
 */
enum TfStatus tf_delta_star_closed_form(double hurst,
                                        double kappa,
                                        double spread,
                                        double horizon,
                                        struct TfOptimalInterval *out);

/**
 * Optimal interval with laziness cost; a null `laziness` means none.
 *
 * # Safety
 * `laziness` must be null or valid for reads; `out` must be valid for writes.
 */
enum TfStatus tf_solve_foc_latency(double hurst,
                                   double kappa,
                                   double spread,
                                   double horizon,
                                   const struct TfLaziness *laziness_spec,
                                   struct TfOptimalInterval *out);

/**
 * Deterministic dyadic profit curve; `level_cap = 0` keeps the default cap.
 *
 * # Safety
 * `laziness` must be null or valid for reads; `out` must be valid for writes.
 * On success `*out` owns a curve to release with [`tf_profit_curve_free`].
 */
enum TfStatus tf_optimize_deterministic(double horizon,
                                        double roughness,
                                        double micro,
                                        double spread,
                                        const struct TfLaziness *laziness_spec,
                                        uint32_t level_cap,
                                        struct TfProfitCurve **out);

/**
 * Expected fBM profit on the dyadic grid `m_lo..=m_hi`.
 *
 * # Safety
 * As for [`tf_optimize_deterministic`].
 */
enum TfStatus tf_expected_profit_curve(double hurst,
                                       double kappa,
                                       double spread,
                                       double horizon,
                                       const struct TfLaziness *laziness_spec,
                                       uint32_t m_lo,
                                       uint32_t m_hi,
                                       struct TfProfitCurve **out);

/**
 * Number of levels in the curve (0 for a null handle).
 *
 * # Safety
 * `curve` must be null or a live handle.
 */
size_t tf_profit_curve_len(const struct TfProfitCurve *curve);

/**
 * Profit-maximizing level and how it was found (0 stopping rule,
 * 1 exhaustive after a non-unimodal curve, 2 exhaustive).
 *
 * # Safety
 * `curve` must be a live handle; outputs must be valid for writes.
 */
enum TfStatus tf_profit_curve_m_star(const struct TfProfitCurve *curve,
                                     uint32_t *m_star,
                                     uint32_t *method);

/**
 * Copies levels and profits into caller buffers of capacity `cap`.
 *
 * # Safety
 * `curve` must be a live handle; buffers must hold `cap` elements.
 */
enum TfStatus tf_profit_curve_copy(const struct TfProfitCurve *curve,
                                   uint32_t *levels,
                                   double *profits,
                                   size_t cap);

/**
 * # Safety
 * `curve` must be null or a handle not yet freed.
 */
void tf_profit_curve_free(struct TfProfitCurve *curve);

/**
 * Samples an fBM path with `n_steps + 1` points; `method` 0 circulant,
 * 1 Cholesky.
 *
 * # Safety
 * `out` must be valid for writes; release the handle with [`tf_fbm_path_free`].
 */
enum TfStatus tf_fbm_sample(double hurst,
                            double sigma,
                            size_t n_steps,
                            double horizon,
                            uint32_t method,
                            uint64_t seed,
                            struct TfFbmPath **out);

/**
 * Number of points in the path (0 for a null handle).
 *
 * # Safety
 * `path` must be null or a live handle.
 */
size_t tf_fbm_path_len(const struct TfFbmPath *path);

/**
 * # Safety
 * `path` must be a live handle; buffers must hold `cap` elements.
 */
enum TfStatus tf_fbm_path_copy(const struct TfFbmPath *path,
                               double *times,
                               double *values,
                               size_t cap);

/**
 * # Safety
 * `path` must be null or a handle not yet freed.
 */
void tf_fbm_path_free(struct TfFbmPath *path);

/**
 * Scaling regression on a uniformly sampled log-price series; `levels = 0`
 * picks the default number of lags.
 *
 * # Safety
 * `log_prices` must hold `len` readable values; `out` must be valid for writes.
 */
enum TfStatus tf_fit_scaling(const double *log_prices,
                             size_t len,
                             double delta_t,
                             uint32_t levels,
                             struct TfHurstFit **out);

/**
 * Fitted `H`, `kappa` and regression `R^2`; any output may be null.
 *
 * # Safety
 * `fit` must be a live handle; non-null outputs must be valid for writes.
 */
enum TfStatus tf_hurst_fit_params(const struct TfHurstFit *fit,
                                  double *hurst,
                                  double *kappa,
                                  double *r_squared);

/**
 * # Safety
 * `fit` must be null or a handle not yet freed.
 */
void tf_hurst_fit_free(struct TfHurstFit *fit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRADEFREQ_H */
