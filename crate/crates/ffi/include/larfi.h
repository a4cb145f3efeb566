#ifndef LARFI_H
#define LARFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every fallible call.
 */
typedef enum LarfiStatus {
  LARFI_STATUS_OK = 0,
  LARFI_STATUS_INVALID_ARGUMENT = 1,
  LARFI_STATUS_NULL_POINTER = 2,
  LARFI_STATUS_BUFFER_TOO_SMALL = 3,
  LARFI_STATUS_NUMERICAL = 4,
  LARFI_STATUS_NOT_POSITIVE_DEFINITE = 5,
  LARFI_STATUS_SIZE_LIMIT = 6,
  LARFI_STATUS_PANIC = 7,
} LarfiStatus;

/*
 Fit outcome, as returned by `larfi_fit_status`.
 */
typedef enum LarfiFitStatus {
  LARFI_FIT_STATUS_CONVERGED = 0,
  LARFI_FIT_STATUS_DIVERGED_SEPARATION = 1,
  LARFI_FIT_STATUS_MAX_ITER = 2,
} LarfiFitStatus;

/*
 Exact-information algorithm selector, passed as `uint32_t`.
 */
typedef enum LarfiAlgorithm {
  LARFI_ALGORITHM_FORWARD = 0,
  LARFI_ALGORITHM_FUNCTIONAL_ITERATION = 1,
  LARFI_ALGORITHM_CLOSED_FORM = 2,
  LARFI_ALGORITHM_BRUTE_FORCE = 3,
} LarfiAlgorithm;

/*
 Information source selector, passed as `uint32_t`.
 */
typedef enum LarfiSource {
  LARFI_SOURCE_EXACT = 0,
  LARFI_SOURCE_EMPIRICAL = 1,
} LarfiSource;

/*
 A fitted model.
 */
typedef struct LarfiFit LarfiFit;

/*
 Model parameters `(alpha_1..alpha_l, beta_0..beta_p)`.
 */
typedef struct LarfiModel LarfiModel;

/*
 A binary series with optional row-major covariates.
 */
typedef struct LarfiSeries LarfiSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *larfi_version(void);

/*
 Message for the last failed call on this thread; empty after a success.
 Valid until the next call on the same thread.
 */
const char *larfi_last_error(void);

/*
 Creates a model with `p` lags and `l` covariates from `dim = l + p + 1`
 coefficients.

 # Safety
 `values` must point to `len` doubles and `out` must be writable.
 */
enum LarfiStatus larfi_model_new(size_t p,
                                 size_t l,
                                 const double *values,
                                 size_t len,
                                 struct LarfiModel **out);

/*
 Number of coefficients, or 0 for a null handle.

 # Safety
 `model` must be null or a live handle.
 */
size_t larfi_model_dim(const struct LarfiModel *model);

/*
 # Safety
 `model` must be null or a handle not yet freed.
 */
void larfi_model_free(struct LarfiModel *model);

/*
 Creates a series of `t_len` zeros and ones. `exog` holds `t_len * cols`
 covariate values row-major (one row per time point) and may be null when
 `cols` is 0.

 # Safety
 Pointers must reference buffers of the stated sizes; `out` must be writable.
 */
enum LarfiStatus larfi_series_new(const uint8_t *y,
                                  size_t t_len,
                                  const double *exog,
                                  size_t cols,
                                  struct LarfiSeries **out);

/*
 # Safety
 `series` must be null or a handle not yet freed.
 */
void larfi_series_free(struct LarfiSeries *series);

/*
 Conditional log-likelihood given the first `p` observations.

 # Safety
 Handles must be live and `out` writable.
 */
enum LarfiStatus larfi_loglik(const struct LarfiModel *model,
                              const struct LarfiSeries *series,
                              double *out);

/*
 Score vector; `out` needs `dim` entries.

 # Safety
 Handles must be live and `out` must hold `out_len` doubles.
 */
enum LarfiStatus larfi_score(const struct LarfiModel *model,
                             const struct LarfiSeries *series,
                             double *out,
                             size_t out_len);

/*
 Empirical information of the observed series; `out` needs `dim * dim`.

 # Safety
 Handles must be live and `out` must hold `out_len` doubles.
 */
enum LarfiStatus larfi_em_fi(const struct LarfiModel *model,
                             const struct LarfiSeries *series,
                             double *out,
                             size_t out_len);

/*
 Exact information over the series' horizon. Only the first `p` values of
 the series (the starting state) and its covariates are used.
 `algorithm` is a `LarfiAlgorithm` code; `out` needs `dim * dim`.

 # Safety
 Handles must be live and `out` must hold `out_len` doubles.
 */
enum LarfiStatus larfi_ex_fi(const struct LarfiModel *model,
                             const struct LarfiSeries *series,
                             uint32_t algorithm_code,
                             double *out,
                             size_t out_len);

/*
 Fits one parameter vector with `p` lags to `n` series by maximum
 likelihood. All series must carry the same number of covariates.
 A separated fit is still returned with `LARFI_STATUS_OK`; check
 `larfi_fit_status`.

 # Safety
 `series` must point to `n` live handles and `out` must be writable.
 */
enum LarfiStatus larfi_fit(const struct LarfiSeries *const *series,
                           size_t n,
                           size_t p,
                           size_t max_iter,
                           struct LarfiFit **out);

/*
 # Safety
 `fit` must be null or a handle not yet freed.
 */
void larfi_fit_free(struct LarfiFit *fit);

/*
 # Safety
 `fit` must be a live handle and `out` writable.
 */
enum LarfiStatus larfi_fit_status(const struct LarfiFit *fit, enum LarfiFitStatus *out);

/*
 Number of coefficients, or 0 for a null handle.

 # Safety
 `fit` must be null or a live handle.
 */
size_t larfi_fit_dim(const struct LarfiFit *fit);

/*
 # Safety
 `fit` must be a live handle and `out` writable.
 */
enum LarfiStatus larfi_fit_loglik(const struct LarfiFit *fit, double *out);

/*
 Estimated coefficients; `out` needs `dim` entries.

 # Safety
 `fit` must be a live handle and `out` must hold `out_len` doubles.
 */
enum LarfiStatus larfi_fit_theta(const struct LarfiFit *fit, double *out, size_t out_len);

/*
 Information at the estimate from the chosen `LarfiSource`; `out`
 needs `dim * dim`.

 # Safety
 `fit` must be a live handle and `out` must hold `out_len` doubles.
 */
enum LarfiStatus larfi_fit_information(const struct LarfiFit *fit,
                                       uint32_t source_code,
                                       double *out,
                                       size_t out_len);

/*
 Wald interval for coefficient `coord` at confidence `level`.
 Any of the output pointers may be null.

 # Safety
 `fit` must be a live handle; non-null outputs must be writable.
 */
enum LarfiStatus larfi_wald_ci(const struct LarfiFit *fit,
                               size_t coord,
                               double level,
                               uint32_t source_code,
                               double *lower,
                               double *upper,
                               double *se);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LARFI_H */
