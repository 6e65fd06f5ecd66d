#ifndef GENFINDER_H
#define GENFINDER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GfStatus {
  GF_STATUS_OK = 0,
  GF_STATUS_NULL_POINTER = 1,
  GF_STATUS_INVALID_ARGUMENT = 2,
  GF_STATUS_PARSE = 3,
  GF_STATUS_INVALID_SNAPSHOT = 4,
  GF_STATUS_TOO_LARGE = 5,
  GF_STATUS_NUMERICAL = 6,
  GF_STATUS_BUFFER_TOO_SMALL = 7,
  GF_STATUS_PANIC = 99,
} GfStatus;

typedef enum GfVerdict {
  GF_VERDICT_MARKOVIAN = 0,
  GF_VERDICT_NON_MARKOVIAN = 1,
  GF_VERDICT_INDETERMINATE = 2,
} GfVerdict;

/**
 * Result of a decision call.
 */
typedef struct GfReport GfReport;

/**
 * A monotone 1-in-3SAT instance.
 */
typedef struct GfSatInstance GfSatInstance;

/**
 * A quantum channel or a stochastic matrix.
 */
typedef struct GfSnapshot GfSnapshot;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next
 * failing call on the same thread; do not free.
 */
const char *gf_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gf_version(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void gf_string_free(char *s);

/**
 * Parses a snapshot JSON document (quantum or classical).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum GfStatus gf_snapshot_from_json(const char *json, struct GfSnapshot **out);

/**
 * Builds a quantum snapshot from a row-major `d²×d²` transfer matrix given as
 * separate real and imaginary parts (`im` may be NULL for a real matrix).
 *
 * # Safety
 * `re` (and `im` if non-NULL) must point to `d⁴` doubles; `out` must be writable.
 */
enum GfStatus gf_snapshot_from_transfer(size_t d,
                                        const double *re,
                                        const double *im,
                                        struct GfSnapshot **out);

/**
 * Builds a classical snapshot from a row-major `n×n` column-stochastic matrix.
 *
 * # Safety
 * `data` must point to `n²` doubles; `out` must be writable.
 */
enum GfStatus gf_snapshot_from_stochastic(size_t n, const double *data, struct GfSnapshot **out);

/**
 * # Safety
 * `s` must be NULL or a handle from this library, not yet freed.
 */
void gf_snapshot_free(struct GfSnapshot *s);

/**
 * Decides Markovianity (quantum) or embeddability (classical) over branches
 * `m ∈ [−branch_bound, branch_bound]^pairs`.
 *
 * # Safety
 * `snapshot` must be a live handle; `out` must be writable.
 */
enum GfStatus gf_decide(const struct GfSnapshot *snapshot,
                        double tol,
                        int64_t branch_bound,
                        struct GfReport **out);

/**
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum GfStatus gf_report_verdict(const struct GfReport *report, enum GfVerdict *out);

/**
 * Side length of the witness generator (0 if there is none).
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum GfStatus gf_report_witness_dim(const struct GfReport *report, size_t *out);

/**
 * Copies the row-major witness into `re` and `im` (each of length `len`, which
 * must be at least the squared witness dimension).
 *
 * # Safety
 * `re` and `im` must be writable for `len` doubles.
 */
enum GfStatus gf_report_witness(const struct GfReport *report, double *re, double *im, size_t len);

/**
 * The report as a "report-v1" JSON document; free with [`gf_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum GfStatus gf_report_to_json(const struct GfReport *report, char **out);

/**
 * # Safety
 * `r` must be NULL or a handle from this library, not yet freed.
 */
void gf_report_free(struct GfReport *r);

/**
 * Parses an instance in the `p 1in3 V C` text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum GfStatus gf_sat_parse(const char *text, struct GfSatInstance **out);

/**
 * # Safety
 * `s` must be NULL or a handle from this library, not yet freed.
 */
void gf_sat_free(struct GfSatInstance *s);

/**
 * Exhaustive satisfiability; `*satisfiable` is set to 1 or 0.
 *
 * # Safety
 * `inst` must be a live handle; `satisfiable` must be writable.
 */
enum GfStatus gf_sat_brute_force(const struct GfSatInstance *inst, int32_t *satisfiable);

/**
 * Runs the three-way reduction check. `tol <= 0` selects the default tolerance.
 * `*agree` is set to 1 or 0; if `json_out` is non-NULL it receives the full
 * verification report (free with [`gf_string_free`]).
 *
 * # Safety
 * `inst` must be a live handle; `agree` must be writable; `json_out` NULL or writable.
 */
enum GfStatus gf_verify_reduction(const struct GfSatInstance *inst,
                                  double tol,
                                  int32_t *agree,
                                  char **json_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GENFINDER_H */
