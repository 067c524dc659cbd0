#ifndef QUICKTAIL_H
#define QUICKTAIL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes returned by every function.
 */
typedef enum QtStatus {
  QT_STATUS_OK = 0,
  QT_STATUS_NULL_POINTER = 1,
  QT_STATUS_DOMAIN = 2,
  QT_STATUS_NO_SOLUTION = 3,
  QT_STATUS_SIZE_CAP = 4,
  QT_STATUS_OVERFLOW = 5,
  QT_STATUS_CONVERGENCE = 6,
  QT_STATUS_INVALID = 7,
  QT_STATUS_IO = 8,
  QT_STATUS_BUFFER_TOO_SMALL = 9,
  QT_STATUS_PANIC = 10,
} QtStatus;

typedef enum QtVariant {
  QT_VARIANT_MINUS = 0,
  QT_VARIANT_PLUS = 1,
} QtVariant;

/*
 Arithmetic for exact distributions.
 */
typedef enum QtMode {
  QT_MODE_RATIONAL = 0,
  QT_MODE_FLOAT = 1,
} QtMode;

/*
 Scaling of `X_n − μ_n`.
 */
typedef enum QtDenom {
  /*
   Divide by `n`.
   */
  QT_DENOM_N = 0,
  /*
   Divide by `n + 1`.
   */
  QT_DENOM_N_PLUS_ONE = 1,
} QtDenom;

/*
 Opaque exact distribution of `X_n`.
 */
typedef struct QtPmf QtPmf;

/*
 Opaque fixed-point table of `ln ψ`.
 */
typedef struct QtPsiTable QtPsiTable;

/*
 Summary of a Monte Carlo batch of `Z_n`.
 */
typedef struct QtSampleSummary {
  uint64_t count;
  double mean;
  double variance;
  double min;
  double max;
} QtSampleSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *qt_version(void);

/*
 Copies the last error message of this thread into `buf` (always
 NUL-terminated when `len > 0`) and returns the full message length.

 # Safety
 `buf` must be null or valid for `len` bytes.
 */
size_t qt_last_error(char *buf, size_t len);

/*
 `μ_n = 2(n+1)H_n − 4n`.

 # Safety
 `out` must be valid for writing.
 */
enum QtStatus qt_mu(uint64_t n, double *out);

/*
 `J(t) = 2(Ei(t) − Ei(1))`.

 # Safety
 `out` must be valid for writing.
 */
enum QtStatus qt_j(double t, double *out);

/*
 Root `w ≥ 1` of `x = 2e^w/w` for `x ≥ 2e`.

 # Safety
 `out` must be valid for writing.
 */
enum QtStatus qt_solve_w(double x, double *out);

/*
 `−xw + J(w) − w² + a ln x`.

 # Safety
 `out` must be valid for writing.
 */
enum QtStatus qt_new_upper_f(double x, double a, double *out);

/*
 Gain of the optimal Chernoff abscissa over `w(x)`.

 # Safety
 `out` must be valid for writing.
 */
enum QtStatus qt_delta_gain(double x, double a, double *out);

/*
 `λ(t)/ĥψ(t) − 1` and the achieved relative quadrature error.

 # Safety
 `ratio_minus_one` must be valid for writing; `rel_err` may be null.
 */
enum QtStatus qt_lambda_ratio(double t,
                              enum QtVariant variant,
                              double rel_tol,
                              double *ratio_minus_one,
                              double *rel_err);

/*
 Builds the exact law of `X_n` under the default size caps.

 # Safety
 `out` must be valid for writing; the handle must be freed with [`qt_pmf_free`].
 */
enum QtStatus qt_pmf_new(size_t n, enum QtMode mode, struct QtPmf **out);

/*
 Releases a handle from [`qt_pmf_new`]; null is ignored.

 # Safety
 `pmf` must be null or a live handle, not used afterwards.
 */
void qt_pmf_free(struct QtPmf *pmf);

/*
 Smallest support point and number of support points.

 # Safety
 `pmf` must be a live handle; `offset` and `len` valid for writing.
 */
enum QtStatus qt_pmf_support(const struct QtPmf *pmf, uint64_t *offset, size_t *len);

/*
 Copies `P(X_n = offset + i)` for every support index into `probs`.

 # Safety
 `pmf` must be a live handle; `probs` valid for `len` doubles.
 */
enum QtStatus qt_pmf_probs(const struct QtPmf *pmf, double *probs, size_t len);

/*
 Mean and variance of `X_n`.

 # Safety
 `pmf` must be a live handle; `mean` and `variance` valid for writing.
 */
enum QtStatus qt_pmf_moments(const struct QtPmf *pmf, double *mean, double *variance);

/*
 `P((X_n − μ_n)/d > x)`, or `≥` when `strict` is false.

 # Safety
 `pmf` must be a live handle; `out` valid for writing.
 */
enum QtStatus qt_pmf_tail(const struct QtPmf *pmf,
                          enum QtDenom denom,
                          double x,
                          bool strict,
                          double *out);

/*
 Kolmogorov distance between two scaled laws.

 # Safety
 Both handles must be live; `out` valid for writing.
 */
enum QtStatus qt_pmf_ks_distance(const struct QtPmf *a,
                                 const struct QtPmf *b,
                                 enum QtDenom denom,
                                 double *out);

/*
 Solves the fixed-point equation for `ln ψ` on `grid` points over `[0, t_max]`.
 An unconverged table is still returned, with status `Convergence`.

 # Safety
 `out` must be valid for writing; the handle must be freed with [`qt_psi_free`].
 */
enum QtStatus qt_psi_new(double t_max,
                         size_t grid,
                         double tol,
                         size_t max_iter,
                         struct QtPsiTable **out);

/*
 Releases a handle from [`qt_psi_new`]; null is ignored.

 # Safety
 `table` must be null or a live handle, not used afterwards.
 */
void qt_psi_free(struct QtPsiTable *table);

/*
 Number of grid points.

 # Safety
 `table` must be a live handle; `len` valid for writing.
 */
enum QtStatus qt_psi_len(const struct QtPsiTable *table, size_t *len);

/*
 Copies the grid and the `ln ψ` values.

 # Safety
 `table` must be a live handle; `t` and `ln_psi` valid for `len` doubles.
 */
enum QtStatus qt_psi_values(const struct QtPsiTable *table, double *t, double *ln_psi, size_t len);

/*
 Interpolated `ln ψ(t)` inside the table range.

 # Safety
 `table` must be a live handle; `out` valid for writing.
 */
enum QtStatus qt_psi_eval(const struct QtPsiTable *table, double t, double *out);

/*
 Smallest `a` with `|ln ψ(t) − (J(t) − t²)| ≤ a t` on grid points `t ≥ t_min`.

 # Safety
 `table` must be a live handle; `out` valid for writing.
 */
enum QtStatus qt_psi_fit_slack(const struct QtPsiTable *table, double t_min, double *out);

/*
 Draws `reps` samples of `Z_n` and counts exceedances of each threshold.

 # Safety
 `thresholds` and `counts` must be valid for `k` elements (may be null
 when `k = 0`); `summary` valid for writing.
 */
enum QtStatus qt_sample(uint64_t n,
                        size_t reps,
                        uint64_t seed,
                        const double *thresholds,
                        uint64_t *counts,
                        size_t k,
                        struct QtSampleSummary *summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUICKTAIL_H */
