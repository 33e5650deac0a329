#ifndef LOGSP_H
#define LOGSP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LogspRegime {
  LOGSP_REGIME_GLOBAL_MIN = 0,
  LOGSP_REGIME_GLOBAL_MIN_MASS_CRITICAL = 1,
  LOGSP_REGIME_LOCAL_MIN_PLUS_MOUNTAIN_PASS = 2,
  LOGSP_REGIME_NO_CRITICAL_POINT = 3,
  LOGSP_REGIME_LAMBDA_EMPTY = 4,
  LOGSP_REGIME_MAX_ON_LAMBDA = 5,
  LOGSP_REGIME_TWO_CRITICAL_POINTS_ON_LAMBDA = 6,
  LOGSP_REGIME_OPEN_UNKNOWN = 7,
} LogspRegime;

typedef enum LogspStatus {
  LOGSP_STATUS_OK = 0,
  LOGSP_STATUS_NULL_POINTER = 1,
  LOGSP_STATUS_INVALID_ARGUMENT = 2,
  LOGSP_STATUS_NOT_CONVERGED = 3,
  LOGSP_STATUS_REGIME_REFUSAL = 4,
  LOGSP_STATUS_IO = 5,
  LOGSP_STATUS_INTERNAL = 6,
  LOGSP_STATUS_PANIC = 7,
} LogspStatus;

typedef enum LogspBranch {
  LOGSP_BRANCH_PLUS = 0,
  LOGSP_BRANCH_MINUS = 1,
  LOGSP_BRANCH_ZERO = 2,
} LogspBranch;

typedef enum LogspMethod {
  LOGSP_METHOD_GLOBAL_MINIMIZE = 0,
  LOGSP_METHOD_LOCAL_MINIMIZE_CAPPED = 1,
  LOGSP_METHOD_LAMBDA_BRANCH_MINIMIZE = 2,
  LOGSP_METHOD_LAMBDA_MAXIMIZE = 3,
} LogspMethod;

/**
 * Opaque sampled field.
 */
typedef struct LogspField LogspField;

/**
 * Opaque solve report.
 */
typedef struct LogspReport LogspReport;

typedef struct LogspParams {
  double gamma;
  double a;
  double p;
  double c;
} LogspParams;

typedef struct LogspFiberPoint {
  double s;
  enum LogspBranch branch;
  double g;
  double gpp;
} LogspFiberPoint;

typedef struct LogspEnergy {
  double kinetic;
  double pnorm;
  double interaction;
  double v1;
  double v2;
  double energy;
  double mass;
} LogspEnergy;

typedef struct LogspResiduals {
  double lambda;
  double q_residual;
  double pohozaev_residual;
  double el_residual;
  uint64_t iters;
  bool converged;
} LogspResiduals;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * failing call on the same thread.
 */
const char *logsp_last_error(void);

/**
 * Static name of a regime tag.
 */
const char *logsp_regime_name(enum LogspRegime tag);

/**
 * Gagliardo–Nirenberg constant for exponent `p`.
 *
 * # Safety
 * `kgn` must be null or valid for writes.
 */
enum LogspStatus logsp_kgn(double p, double *kgn);

/**
 * # Safety
 * `params` must be null or point to a valid struct; `tag` must be null or valid for writes.
 */
enum LogspStatus logsp_classify(const struct LogspParams *params, enum LogspRegime *tag);

/**
 * Fiber critical points for scalars `A`, `C`, `V`. Writes up to `cap` points
 * and the total count.
 *
 * # Safety
 * `points` must be valid for `cap` writes (or null when `cap` is 0); `count` must be valid for writes.
 */
enum LogspStatus logsp_fiber_points(const struct LogspParams *params,
                                    double kinetic,
                                    double pnorm,
                                    double interaction,
                                    struct LogspFiberPoint *points,
                                    size_t cap,
                                    size_t *count);

/**
 * Gaussian `exp(-r²/(2σ²))` of mass `mass` on an `n × n` grid of side `extent`.
 *
 * # Safety
 * `field` must be null or valid for writes.
 */
enum LogspStatus logsp_field_gaussian(size_t n,
                                      double extent,
                                      double sigma,
                                      double mass,
                                      struct LogspField **field);

/**
 * Reads an LPF1 file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `field` must be valid for writes.
 */
enum LogspStatus logsp_field_load(const char *path, struct LogspField **field);

/**
 * Writes an LPF1 file.
 *
 * # Safety
 * `field` must be a live handle; `path` a NUL-terminated string.
 */
enum LogspStatus logsp_field_save(const struct LogspField *field, const char *path);

/**
 * Grid resolution and extent of a field.
 *
 * # Safety
 * `field` must be a live handle; `n` and `extent` valid for writes.
 */
enum LogspStatus logsp_field_grid(const struct LogspField *field, size_t *n, double *extent);

/**
 * Copies the `n²` row-major samples into `values`, which holds `len` doubles.
 *
 * # Safety
 * `field` must be a live handle; `values` valid for `len` writes.
 */
enum LogspStatus logsp_field_values(const struct LogspField *field, double *values, size_t len);

/**
 * # Safety
 * `field` must be null or a handle not yet freed.
 */
void logsp_field_free(struct LogspField *field);

/**
 * Energy functionals of a field.
 *
 * # Safety
 * `field` must be a live handle; `params` valid; `energy` valid for writes.
 */
enum LogspStatus logsp_energy(const struct LogspField *field,
                              const struct LogspParams *params,
                              struct LogspEnergy *energy);

/**
 * Solves from a Gaussian of width 1 on an `n × n` grid of side `extent`.
 * On `NotConverged` the partial report is still returned through `report`.
 *
 * # Safety
 * `params` must be valid; `report` valid for writes.
 */
enum LogspStatus logsp_solve(const struct LogspParams *params,
                             size_t n,
                             double extent,
                             enum LogspMethod method,
                             enum LogspBranch branch,
                             uint64_t seed,
                             struct LogspReport **report);

/**
 * # Safety
 * `report` must be a live handle; `energy` valid for writes.
 */
enum LogspStatus logsp_report_energy(const struct LogspReport *report, struct LogspEnergy *energy);

/**
 * # Safety
 * `report` must be a live handle; `residuals` valid for writes.
 */
enum LogspStatus logsp_report_residuals(const struct LogspReport *report,
                                        struct LogspResiduals *residuals);

/**
 * Copies the report's field into a new handle.
 *
 * # Safety
 * `report` must be a live handle; `field` valid for writes.
 */
enum LogspStatus logsp_report_field(const struct LogspReport *report, struct LogspField **field);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void logsp_report_free(struct LogspReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOGSP_H */
