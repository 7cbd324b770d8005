#ifndef AHMASS_H
#define AHMASS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes.
typedef enum {
  AHMASS_STATUS_OK = 0,
  AHMASS_STATUS_NULL_POINTER = 1,
  AHMASS_STATUS_INVALID_INPUT = 2,
  AHMASS_STATUS_CONFIG = 3,
  AHMASS_STATUS_HYPOTHESIS = 4,
  AHMASS_STATUS_CONVERGENCE = 5,
  AHMASS_STATUS_NUMERICAL = 6,
  AHMASS_STATUS_IO = 7,
  AHMASS_STATUS_PANIC = 8,
} AhmassStatus;

// Radial fundamental solution of −Δ + n on hyperbolic space.
typedef struct AhmassKernel AhmassKernel;

// Result of a pipeline run.
typedef struct AhmassReport AhmassReport;

// One row of the per-ν table.
typedef struct {
  double nu;
  double h_minus;
  double h_plus;
  double f_norm;
  double a_nu;
  double h_scalar;
  double h_tilde_scalar;
  double mass_lhs;
  double mass_rhs;
  double margin;
  bool positive;
  bool ok;
} AhmassNuRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the next failing call.
const char *ahmass_last_error(void);

// Library version as a static NUL-terminated string.
const char *ahmass_version(void);

// Build the kernel for dimension `n` with series tolerance `tol`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
AhmassStatus ahmass_kernel_new(uintptr_t n, double tol, AhmassKernel **out);

// # Safety
// `k` must be NULL or a handle from [`ahmass_kernel_new`] not yet freed.
void ahmass_kernel_free(AhmassKernel *k);

// Normalisation constant κ of the kernel.
//
// # Safety
// `k` must be a live kernel handle and `out` writable.
AhmassStatus ahmass_kernel_kappa(const AhmassKernel *k, double *out);

// G₀(s).
//
// # Safety
// `k` must be a live kernel handle and `out` writable.
AhmassStatus ahmass_green0(const AhmassKernel *k, double s, double *out);

// G₀′(s).
//
// # Safety
// `k` must be a live kernel handle and `out` writable.
AhmassStatus ahmass_green_prime(const AhmassKernel *k, double s, double *out);

// Flux of G₀ through the geodesic sphere of radius s.
//
// # Safety
// `k` must be a live kernel handle and `out` writable.
AhmassStatus ahmass_green_flux(const AhmassKernel *k, double s, double *out);

// Margin of the curvature inequality behind the conformal deformation by (1 + v).
//
// # Safety
// `out` must be writable.
AhmassStatus ahmass_deformation_gap(double v, uintptr_t n, double *out);

// Run the pipeline on a TOML configuration.
//
// # Safety
// `config_toml` must be a NUL-terminated string and `out` writable.
AhmassStatus ahmass_pipeline_run(const char *config_toml, AhmassReport **out);

// # Safety
// `r` must be NULL or a handle from [`ahmass_pipeline_run`] not yet freed.
void ahmass_report_free(AhmassReport *r);

// Number of per-ν records, 0 for NULL.
//
// # Safety
// `r` must be NULL or a live report handle.
uintptr_t ahmass_report_len(const AhmassReport *r);

// Whether every record passed.
//
// # Safety
// `r` must be NULL or a live report handle.
bool ahmass_report_all_ok(const AhmassReport *r);

// Copy record `i` (descending ν order).
//
// # Safety
// `r` must be a live report handle and `out` writable.
AhmassStatus ahmass_report_record(const AhmassReport *r, uintptr_t i, AhmassNuRecord *out);

// Bound |A_ν| ≤ C ν^{1/(n+1)}: writes C and the fitted log–log exponent.
//
// # Safety
// `r` must be a live report handle; `c` and `exponent` writable.
AhmassStatus ahmass_report_bound(const AhmassReport *r, double *c, double *exponent);

// Write the CSV and JSON reports into `dir`.
//
// # Safety
// `r` must be a live report handle and `dir` a NUL-terminated path.
AhmassStatus ahmass_report_write(const AhmassReport *r, const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AHMASS_H */
