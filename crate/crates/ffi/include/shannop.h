#ifndef SHANNOP_H
#define SHANNOP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ShannopStatus {
  SHANNOP_STATUS_OK = 0,
  SHANNOP_STATUS_NULL_POINTER = 1,
  SHANNOP_STATUS_INVALID_ARGUMENT = 2,
  SHANNOP_STATUS_FORMAT = 3,
  SHANNOP_STATUS_IO = 4,
  SHANNOP_STATUS_DIVERGED = 5,
  SHANNOP_STATUS_REFUSED = 6,
  SHANNOP_STATUS_UNSUPPORTED = 7,
  SHANNOP_STATUS_INTERNAL = 8,
  SHANNOP_STATUS_PANIC = 9,
} ShannopStatus;

typedef enum ShannopScheme {
  SHANNOP_SCHEME_TENSORIAL = 0,
  SHANNOP_SCHEME_MRA = 1,
} ShannopScheme;

/**
 * A real field on a periodic grid.
 */
typedef struct ShannopField ShannopField;

/**
 * Convergence record of one solve.
 */
typedef struct ShannopReport ShannopReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty if none. Valid until
 * the next failing call on the same thread.
 */
const char *shannop_last_error(void);

/**
 * Copies `components * prod(sizes)` samples into a new field.
 *
 * # Safety
 * `sizes` must point to `dim` values and `values` to the sample count;
 * `out` must be writable.
 */
enum ShannopStatus shannop_field_new(size_t dim,
                                     const size_t *sizes,
                                     size_t components,
                                     const double *values,
                                     struct ShannopField **out);

/**
 * Loads an SWF1 file.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` writable.
 */
enum ShannopStatus shannop_field_read(const char *path, struct ShannopField **out);

/**
 * Writes an SWF1 file.
 *
 * # Safety
 * `field` must be a live handle and `path` a nul-terminated string.
 */
enum ShannopStatus shannop_field_write(const struct ShannopField *field, const char *path);

/**
 * Number of samples (`components * points`); 0 for a null handle.
 *
 * # Safety
 * `field` must be null or a live handle.
 */
size_t shannop_field_len(const struct ShannopField *field);

/**
 * Number of components; 0 for a null handle.
 *
 * # Safety
 * `field` must be null or a live handle.
 */
size_t shannop_field_components(const struct ShannopField *field);

/**
 * Borrowed pointer to the samples, valid while the handle lives.
 *
 * # Safety
 * `field` must be null or a live handle.
 */
const double *shannop_field_values(const struct ShannopField *field);

/**
 * # Safety
 * `field` must be null or a handle not yet freed.
 */
void shannop_field_free(struct ShannopField *field);

/**
 * Solves `(Id − αΔ)u = v` by band-preconditioned Richardson iteration.
 * On [`ShannopStatus::Diverged`] `out_report` still receives the report and
 * `out_u` is null.
 *
 * # Safety
 * `v` must be a live handle; `out_u` and `out_report` writable.
 */
enum ShannopStatus shannop_solve_ilap(const struct ShannopField *v,
                                      double alpha,
                                      enum ShannopScheme scheme,
                                      uint32_t packet_depth,
                                      double tol,
                                      size_t max_iter,
                                      struct ShannopField **out_u,
                                      struct ShannopReport **out_report);

/**
 * Splits a `d`-component field into divergence-free and gradient parts with
 * the iterative band projector on a tensorial partition.
 *
 * # Safety
 * `u` must be a live handle; the three outputs writable.
 */
enum ShannopStatus shannop_helmholtz(const struct ShannopField *u,
                                     uint32_t packet_depth,
                                     double tol,
                                     size_t max_iter,
                                     struct ShannopField **out_div,
                                     struct ShannopField **out_curl,
                                     struct ShannopReport **out_report);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
size_t shannop_report_iterations(const struct ShannopReport *report);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
bool shannop_report_converged(const struct ShannopReport *report);

/**
 * Fitted asymptotic rate, or NaN when too few residuals were recorded.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
double shannop_report_fitted_rate(const struct ShannopReport *report);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
double shannop_report_theoretical_rate(const struct ShannopReport *report);

/**
 * Copies up to `cap` relative residuals into `buf` and returns the total
 * count, so a call with `cap = 0` sizes the buffer.
 *
 * # Safety
 * `report` must be null or a live handle; `buf` must hold `cap` values.
 */
size_t shannop_report_residuals(const struct ShannopReport *report, double *buf, size_t cap);

/**
 * Report as JSON; release with [`shannop_string_free`]. Null on a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
char *shannop_report_to_json(const struct ShannopReport *report);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void shannop_report_free(struct ShannopReport *report);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void shannop_string_free(char *s);

/**
 * `¼(a/b + b/a)² − 1`.
 */
double shannop_rate_kantorovich(double a, double b);

/**
 * `α(b² − a²) / (2 + α(a² + b²))`.
 */
double shannop_rate_implicit_laplacian(double alpha, double a, double b);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHANNOP_H */
