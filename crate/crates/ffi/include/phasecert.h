#ifndef PHASECERT_H
#define PHASECERT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum PcStatus {
  PC_STATUS_OK = 0,
  // A required pointer argument was null.
  PC_STATUS_NULL = 1,
  // A string argument was not valid UTF-8.
  PC_STATUS_UTF8 = 2,
  // Bad argument, config, state description or file contents.
  PC_STATUS_INVALID = 3,
  // A numerical precondition failed (singular, non-finite, unresolved, ...).
  PC_STATUS_NUMERICAL = 4,
  PC_STATUS_IO = 5,
  // An output buffer is too small.
  PC_STATUS_BUFFER_TOO_SMALL = 6,
  PC_STATUS_PANIC = 7,
} PcStatus;

// Opaque field handle.
typedef struct PcField PcField;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread; empty if none. The pointer
// stays valid until the next failing call on the same thread.
const char *pc_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void pc_string_free(char *s);

// Releases a field handle. Null is ignored.
//
// # Safety
// `field` must come from this library and not have been freed.
void pc_field_free(struct PcField *field);

// Builds a field from a state description (JSON, or the `kind:key=value`
// shorthand). `grid_points == 0` and `half_extent <= 0` select defaults.
//
// # Safety
// `state` must be a NUL-terminated string, `out` a writable pointer.
enum PcStatus pc_field_from_state(const char *state,
                                  size_t grid_points,
                                  double half_extent,
                                  double hbar,
                                  struct PcField **out);

// Builds a field on a uniform grid with `points` samples on each of the
// `2·dim_n` axes, each spanning `[-half_extent, half_extent)`. `values`
// holds `2·points^(2·dim_n)` doubles, interleaved `(re, im)`, row-major in
// the order `x_1..x_n, p_1..p_n`.
//
// # Safety
// `values` must point to `values_len` readable doubles.
enum PcStatus pc_field_from_values(size_t dim_n,
                                   size_t points,
                                   double half_extent,
                                   double hbar,
                                   const double *values,
                                   size_t values_len,
                                   struct PcField **out);

// Reads a binary or CSV field file.
//
// # Safety
// `path` must be a NUL-terminated string, `out` a writable pointer.
enum PcStatus pc_field_load(const char *path, struct PcField **out);

// Writes a field file; `csv != 0` selects CSV, otherwise binary.
//
// # Safety
// `field` must be a live handle and `path` a NUL-terminated string.
enum PcStatus pc_field_save(const struct PcField *field, const char *path, int32_t csv);

// Number of complex samples; 0 for a null handle.
//
// # Safety
// `field` must be null or a live handle.
size_t pc_field_len(const struct PcField *field);

// Half-dimension `n`; 0 for a null handle.
//
// # Safety
// `field` must be null or a live handle.
size_t pc_field_dim(const struct PcField *field);

// Copies the samples as interleaved `(re, im)` doubles. `buf_len` counts
// doubles and must be at least `2·pc_field_len`.
//
// # Safety
// `buf` must point to `buf_len` writable doubles.
enum PcStatus pc_field_values(const struct PcField *field, double *buf, size_t buf_len);

// Symplectic Fourier transform; the result lives on the dual grid.
//
// # Safety
// `field` must be a live handle, `out` a writable pointer.
enum PcStatus pc_symplectic_ft(const struct PcField *field, struct PcField **out);

// Mass, mean, covariance, purity and boundary fraction as JSON.
//
// # Safety
// `field` must be a live handle, `out` a writable pointer. Free the string
// with [`pc_string_free`].
enum PcStatus pc_moment_report_json(const struct PcField *field, char **out);

// Runs a certification from a JSON run config (`{"state": {...}, ...}`)
// and returns the bundle as JSON. `exit_code` (may be null) receives the
// CLI exit code: 0 pass, 1 fail, 2 indeterminate, 3 certificate error.
//
// # Safety
// `config_json` must be a NUL-terminated string, `out` a writable pointer.
enum PcStatus pc_certify_json(const char *config_json, char **out, int32_t *exit_code);

// Symplectic eigenvalues of a symmetric positive-definite `side × side`
// row-major matrix (`side` even). Writes `side / 2` ascending values.
//
// # Safety
// `matrix` must hold `side·side` doubles and `values` `side / 2` writable
// doubles.
enum PcStatus pc_symplectic_spectrum(const double *matrix, size_t side, double *values);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHASECERT_H */
