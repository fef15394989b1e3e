#ifndef PEAL_H
#define PEAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PealStatus {
  PEAL_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  PEAL_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  PEAL_STATUS_INVALID_UTF8 = 2,
  /**
   * The deal file failed to parse or validate.
   */
  PEAL_STATUS_INVALID_DEAL = 3,
  /**
   * The run could not be completed.
   */
  PEAL_STATUS_RUN_FAILED = 4,
  /**
   * The requested report does not exist.
   */
  PEAL_STATUS_NOT_FOUND = 5,
  /**
   * The library panicked; the handle involved should be discarded.
   */
  PEAL_STATUS_INTERNAL = 6,
} PealStatus;

/**
 * A parsed and validated deal file.
 */
typedef struct PealDeal PealDeal;

/**
 * A finished run with its rendered reports.
 */
typedef struct PealRun PealRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on this thread.
 */
const char *peal_last_error(void);

/**
 * Engine version as a static string.
 */
const char *peal_version(void);

/**
 * Release a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void peal_string_free(char *s);

/**
 * Parse and validate a deal file given as JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum PealStatus peal_deal_parse(const char *json, struct PealDeal **out);

/**
 * Release a deal. Null is ignored.
 *
 * # Safety
 * `deal` must come from [`peal_deal_parse`] and not have been freed.
 */
void peal_deal_free(struct PealDeal *deal);

/**
 * Number of exposures in the deal.
 *
 * # Safety
 * `deal` must be a live handle and `out` a writable pointer.
 */
enum PealStatus peal_deal_exposure_count(const struct PealDeal *deal, size_t *out);

/**
 * Frequency-rule verdicts of the deal as a JSON array.
 *
 * # Safety
 * `deal` must be a live handle and `out` a writable pointer.
 */
enum PealStatus peal_deal_compliance_json(const struct PealDeal *deal, char **out);

/**
 * Run the full pipeline in memory.
 *
 * `scenarios == 0`, `seed < 0` or `alpha <= 0` keep the deal file's value.
 *
 * # Safety
 * `deal` must be a live handle and `out` a writable pointer.
 */
enum PealStatus peal_run(const struct PealDeal *deal,
                         size_t scenarios,
                         int64_t seed,
                         double alpha,
                         struct PealRun **out);

/**
 * Release a run. Null is ignored.
 *
 * # Safety
 * `run` must come from [`peal_run`] and not have been freed.
 */
void peal_run_free(struct PealRun *run);

/**
 * The run id (16 hex digits).
 *
 * # Safety
 * `run` must be a live handle and `out` a writable pointer.
 */
enum PealStatus peal_run_id(const struct PealRun *run, char **out);

/**
 * Whether every compliance verdict of the run passed.
 *
 * # Safety
 * `run` must be a live handle and `out` a writable pointer.
 */
enum PealStatus peal_run_compliant(const struct PealRun *run, bool *out);

/**
 * One report by file name, e.g. `features.json` or `tranching.csv`.
 *
 * # Safety
 * `run` must be a live handle, `name` a NUL-terminated string and `out`
 * a writable pointer.
 */
enum PealStatus peal_run_report(const struct PealRun *run, const char *name, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PEAL_H */
