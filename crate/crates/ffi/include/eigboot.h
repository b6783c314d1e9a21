#ifndef EIGBOOT_H
#define EIGBOOT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum EigbootStatus {
  EIGBOOT_STATUS_OK = 0,
  EIGBOOT_STATUS_NULL_POINTER = 1,
  EIGBOOT_STATUS_INVALID_INPUT = 2,
  EIGBOOT_STATUS_NON_FINITE = 3,
  EIGBOOT_STATUS_LENGTH_MISMATCH = 4,
  EIGBOOT_STATUS_NEGATIVE_WEIGHT = 5,
  EIGBOOT_STATUS_K_OUT_OF_RANGE = 6,
  EIGBOOT_STATUS_BAD_SPECTRAL_ARGUMENT = 7,
  EIGBOOT_STATUS_DEGENERATE_SPECTRUM = 8,
  EIGBOOT_STATUS_NOT_CONVERGED = 9,
  EIGBOOT_STATUS_HERGLOTZ_VIOLATION = 10,
  EIGBOOT_STATUS_TOO_FEW_REPLICATES = 11,
  EIGBOOT_STATUS_LINALG = 12,
  EIGBOOT_STATUS_IO = 13,
  EIGBOOT_STATUS_PARSE = 14,
  EIGBOOT_STATUS_BUFFER_TOO_SMALL = 15,
  EIGBOOT_STATUS_PANIC = 16,
} EigbootStatus;

// Distribution of the elliptical scale factor; passed as a `uint32_t` code.
typedef enum EigbootLaw {
  EIGBOOT_LAW_GAUSSIAN = 0,
  EIGBOOT_LAW_ELLIP_NORMAL = 1,
  EIGBOOT_LAW_ELLIP_UNIFORM = 2,
  EIGBOOT_LAW_ELLIP_EXP = 3,
} EigbootLaw;

// Statistic code, passed as a `uint32_t`.
typedef enum EigbootStatistic {
  // Largest eigenvalue.
  EIGBOOT_STATISTIC_TOP_EIGENVALUE = 0,
  // `λ₁ − λ₂`.
  EIGBOOT_STATISTIC_GAP = 1,
  // `(λ₁ − λ₂) / (λ₂ − λ₃)`.
  EIGBOOT_STATISTIC_GAP_RATIO = 2,
} EigbootStatistic;

// Confidence-interval method code, passed as a `uint32_t`.
typedef enum EigbootInterval {
  EIGBOOT_INTERVAL_PERCENTILE = 0,
  EIGBOOT_INTERVAL_NORMAL = 1,
  EIGBOOT_INTERVAL_BIAS_CORRECTED = 2,
} EigbootInterval;

// An `n × p` data matrix, one observation per row.
typedef struct EigbootData EigbootData;

// Bootstrap replicates of a statistic together with its point estimate.
typedef struct EigbootDistribution EigbootDistribution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version and build revision as a static NUL-terminated string.
const char *eigboot_version(void);

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `len`). Returns the length of the full message
// without the terminator, or 0 when the last call succeeded.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t eigboot_last_error_message(char *buf, size_t len);

// Copies an `n × p` row-major array into a new data handle.
//
// # Safety
// `values` must point to `n * p` doubles; `out_data` must be writable.
enum EigbootStatus eigboot_data_new(const double *values,
                                    size_t n,
                                    size_t p,
                                    struct EigbootData **out_data);

// Simulates `n` observations of `X = D Σ^{1/2} Z` with spike `lambda1` on
// a random orthogonal basis and unit bulk.
//
// # Safety
// `out_data` must be writable.
enum EigbootStatus eigboot_data_generate(size_t n,
                                         size_t p,
                                         double lambda1,
                                         uint32_t law,
                                         uint64_t seed,
                                         struct EigbootData **out_data);

// # Safety
// `data` must be null or a handle from this library not yet freed.
void eigboot_data_free(struct EigbootData *data);

// # Safety
// `data` must be a live handle; the outputs must be writable.
enum EigbootStatus eigboot_data_shape(const struct EigbootData *data, size_t *n, size_t *p);

// The `k` largest eigenvalues of the sample covariance, in descending
// order. `centered` selects `(X − X̄)ᵀ(X − X̄)/(n − 1)` over `XᵀX/n`.
//
// # Safety
// `data` must be a live handle and `out_values` valid for `k` doubles.
enum EigbootStatus eigboot_top_eigenvalues(const struct EigbootData *data,
                                           size_t k,
                                           bool centered,
                                           double *out_values);

// Nonparametric bootstrap of `statistic` with `replicates` resamples;
// data are re-centred within each resample.
//
// # Safety
// `data` must be a live handle; `out_dist` must be writable.
enum EigbootStatus eigboot_bootstrap(const struct EigbootData *data,
                                     uint32_t statistic,
                                     size_t replicates,
                                     uint64_t seed,
                                     struct EigbootDistribution **out_dist);

// # Safety
// `dist` must be null or a handle from this library not yet freed.
void eigboot_distribution_free(struct EigbootDistribution *dist);

// Number of replicates, or 0 for a null handle.
//
// # Safety
// `dist` must be null or a live handle.
size_t eigboot_distribution_len(const struct EigbootDistribution *dist);

// # Safety
// `dist` must be a live handle; `out_value` must be writable.
enum EigbootStatus eigboot_distribution_point_estimate(const struct EigbootDistribution *dist,
                                                       double *out_value);

// Copies the replicates into `buf`. Fails with `BUFFER_TOO_SMALL` when
// `len` is below [`eigboot_distribution_len`].
//
// # Safety
// `dist` must be a live handle and `buf` valid for `len` doubles.
enum EigbootStatus eigboot_distribution_replicates(const struct EigbootDistribution *dist,
                                                   double *buf,
                                                   size_t len);

// Bootstrap bias `mean(replicates) − point estimate`.
//
// # Safety
// `dist` must be a live handle; `out_value` must be writable.
enum EigbootStatus eigboot_distribution_bias(const struct EigbootDistribution *dist,
                                             double *out_value);

// Bootstrap variance (divisor `B − 1`); needs at least two replicates.
//
// # Safety
// `dist` must be a live handle; `out_value` must be writable.
enum EigbootStatus eigboot_distribution_variance(const struct EigbootDistribution *dist,
                                                 double *out_value);

// Two-sided confidence interval at `level` in (0, 1). `out_fell_back`
// (may be null) reports a bias-corrected interval that fell back to the
// percentile interval.
//
// # Safety
// `dist` must be a live handle; `lower` and `upper` must be writable.
enum EigbootStatus eigboot_distribution_interval(const struct EigbootDistribution *dist,
                                                 uint32_t method,
                                                 double level,
                                                 double *lower,
                                                 double *upper,
                                                 bool *out_fell_back);

// Marchenko–Pastur density at `x` for ratio `r = p/n`.
//
// # Safety
// `out_value` must be writable.
enum EigbootStatus eigboot_mp_density(double x, double r, double *out_value);

// Marchenko–Pastur distribution function at `x`.
//
// # Safety
// `out_value` must be writable.
enum EigbootStatus eigboot_mp_cdf(double x, double r, double *out_value);

// Centring and scaling of the largest eigenvalue under the null.
//
// # Safety
// `mu` and `sigma` must be writable.
enum EigbootStatus eigboot_johnstone(size_t n, size_t p, double *mu, double *sigma);

// Limit location and scale of the top sample eigenvalue for a population
// spike `lambda1`. `out_supercritical` is set when the spike separates
// from the bulk; otherwise `out_mu` and `out_sigma` are NaN.
//
// # Safety
// All outputs must be writable.
enum EigbootStatus eigboot_spike(double lambda1,
                                 size_t n,
                                 size_t p,
                                 double *out_mu,
                                 double *out_sigma,
                                 bool *out_supercritical);

// Tail bound `min(1, 4 exp(−p² v² t² / (16 n)))` on the deviation of the
// bootstrap Stieltjes transform.
double eigboot_azuma_bound(double t, size_t p, double v, size_t n);

// Limiting Stieltjes transform at `z` of the spectrum of a sample
// covariance with identity population covariance and ratio `r`.
//
// # Safety
// `out_re` and `out_im` must be writable.
enum EigbootStatus eigboot_mp_stieltjes(double z_re,
                                        double z_im,
                                        double r,
                                        double *out_re,
                                        double *out_im);

// Runs the simulation study described by a JSON configuration and returns
// the JSON summary in `*out_json`, to be released with
// [`eigboot_string_free`]. `workers` of 0 uses every core.
//
// # Safety
// `config_json` must be a NUL-terminated string; `out_json` writable.
enum EigbootStatus eigboot_run_experiment_json(const char *config_json,
                                               size_t workers,
                                               char **out_json);

// # Safety
// `s` must be null or a string returned by this library not yet freed.
void eigboot_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EIGBOOT_H */
