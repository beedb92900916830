#ifndef SURFSIM_H
#define SURFSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SurfsimStatus {
  SURFSIM_STATUS_OK = 0,
  SURFSIM_STATUS_NULL_ARGUMENT = 1,
  SURFSIM_STATUS_INVALID_UTF8 = 2,
  SURFSIM_STATUS_CONFIG = 3,
  SURFSIM_STATUS_PARSE = 4,
  SURFSIM_STATUS_IO = 5,
  SURFSIM_STATUS_SIMULATION = 6,
  SURFSIM_STATUS_PANIC = 7,
} SurfsimStatus;

/**
 * A validated scenario configuration.
 */
typedef struct SurfsimConfig SurfsimConfig;

/**
 * The result of one run: metrics plus the trace log.
 */
typedef struct SurfsimRun SurfsimRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread; do not free it.
 */
const char *surfsim_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *surfsim_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void surfsim_string_free(char *s);

/**
 * Parses and validates a JSON config.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` a writable pointer.
 */
enum SurfsimStatus surfsim_config_parse(const char *json, struct SurfsimConfig **out);

/**
 * # Safety
 * `config` must come from [`surfsim_config_parse`] or be null.
 */
void surfsim_config_free(struct SurfsimConfig *config);

/**
 * The config with every default filled in, as pretty JSON. Null on a null
 * handle.
 *
 * # Safety
 * `config` must be a live handle or null.
 */
char *surfsim_config_to_json(const struct SurfsimConfig *config);

/**
 * SHA-256 of the canonical config JSON, hex encoded.
 *
 * # Safety
 * `config` must be a live handle or null.
 */
char *surfsim_config_hash(const struct SurfsimConfig *config);

/**
 * Runs one simulation.
 *
 * # Safety
 * `config` must be a live handle; `out` a writable pointer.
 */
enum SurfsimStatus surfsim_run(const struct SurfsimConfig *config,
                               uint64_t seed,
                               struct SurfsimRun **out);

/**
 * Rebuilds a run from a trace log produced by [`surfsim_run_trace_log`] or
 * the CLI.
 *
 * # Safety
 * `log` must be a NUL-terminated string; `out` a writable pointer.
 */
enum SurfsimStatus surfsim_replay(const char *log, struct SurfsimRun **out);

/**
 * # Safety
 * `run` must come from [`surfsim_run`] / [`surfsim_replay`] or be null.
 */
void surfsim_run_free(struct SurfsimRun *run);

/**
 * Final receivers over `N - 1`; NaN on a null handle.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
double surfsim_run_final_fraction(const struct SurfsimRun *run);

/**
 * Mean per-node delivery ratio; NaN on a null handle.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
double surfsim_run_mean_delivery(const struct SurfsimRun *run);

/**
 * Number of slots simulated; 0 on a null handle.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
size_t surfsim_run_slots(const struct SurfsimRun *run);

/**
 * Copies up to `len` accumulative-receiver entries (hop 0 first) into
 * `buf` and returns the full curve length. Pass a null `buf` to query the
 * length.
 *
 * # Safety
 * `run` must be a live handle or null; `buf` must hold `len` doubles.
 */
size_t surfsim_run_accumulative(const struct SurfsimRun *run, double *buf, size_t len);

/**
 * The run's trace log as an owned string.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
char *surfsim_run_trace_log(const struct SurfsimRun *run);

/**
 * Runs and writes the CLI's `run` output (CSVs, manifest, optionally
 * trace.log and topology.txt) into `dir`.
 *
 * # Safety
 * `config` must be a live handle; `dir` a NUL-terminated path.
 */
enum SurfsimStatus surfsim_run_to_dir(const struct SurfsimConfig *config,
                                      uint64_t seed,
                                      const char *dir,
                                      bool emit_trace);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SURFSIM_H */
