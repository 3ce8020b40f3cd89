#ifndef PWA_LYAP_H
#define PWA_LYAP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Return code of every fallible call.
 */
typedef enum PwaStatus {
  PWA_STATUS_OK = 0,
  PWA_STATUS_NULL_POINTER = 1,
  PWA_STATUS_INVALID_ARGUMENT = 2,
  PWA_STATUS_IO = 3,
  PWA_STATUS_PARSE = 4,
  PWA_STATUS_INVALID_PARTITION = 5,
  PWA_STATUS_SOLVER = 6,
  PWA_STATUS_PANIC = 7,
} PwaStatus;

typedef enum PwaStrategy {
  PWA_STRATEGY_NAIVE = 0,
  PWA_STRATEGY_LYAPUNOV_BASED = 1,
  PWA_STRATEGY_VECTOR_FIELD = 2,
} PwaStrategy;

/**
 * A partition with its per-cell dynamics.
 */
typedef struct PwaPartition PwaPartition;

/**
 * Outcome of [`pwa_analyze`].
 */
typedef struct PwaResult PwaResult;

/**
 * Search parameters; start from [`pwa_config_default`].
 */
typedef struct PwaConfig {
  double eps1;
  double eps2;
  double zero_tolerance;
  double timeout_seconds;
  uint64_t seed;
} PwaConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *pwa_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pwa_version(void);

struct PwaConfig pwa_config_default(void);

/**
 * Loads a partition from a JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for writes.
 */
enum PwaStatus pwa_partition_load(const char *path, struct PwaPartition **out);

/**
 * Parses a partition from a JSON string.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` valid for writes.
 */
enum PwaStatus pwa_partition_parse(const char *json, struct PwaPartition **out);

/**
 * Writes one of the built-in benchmarks ("flower", "canonical_4d",
 * "mpc_plant_4d") to `out`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` valid for writes.
 */
enum PwaStatus pwa_partition_benchmark(const char *name, struct PwaPartition **out);

/**
 * # Safety
 * `p` must come from this library and not be used afterwards. NULL is ignored.
 */
void pwa_partition_free(struct PwaPartition *p);

/**
 * State dimension, or 0 for NULL.
 *
 * # Safety
 * `p` must be NULL or a live handle.
 */
size_t pwa_partition_dim(const struct PwaPartition *p);

/**
 * # Safety
 * `p` must be NULL or a live handle.
 */
size_t pwa_partition_num_cells(const struct PwaPartition *p);

/**
 * # Safety
 * `p` must be NULL or a live handle.
 */
size_t pwa_partition_num_vertices(const struct PwaPartition *p);

/**
 * Number of well-formedness violations (0 means the partition is valid).
 *
 * # Safety
 * `p` must be a live handle and `count` valid for writes.
 */
enum PwaStatus pwa_partition_validate(const struct PwaPartition *p, size_t *count);

/**
 * Runs the search. A timed-out search still succeeds; query its status
 * with [`pwa_result_is_valid`].
 *
 * # Safety
 * `p` must be a live handle, `config` NULL (defaults) or valid, and `out`
 * valid for writes.
 */
enum PwaStatus pwa_analyze(const struct PwaPartition *p,
                           enum PwaStrategy strategy,
                           const struct PwaConfig *config,
                           struct PwaResult **out);

/**
 * # Safety
 * `r` must come from [`pwa_analyze`] and not be used afterwards. NULL is ignored.
 */
void pwa_result_free(struct PwaResult *r);

/**
 * 1 if a certified Lyapunov function was found, 0 otherwise (and for NULL).
 *
 * # Safety
 * `r` must be NULL or a live handle.
 */
int32_t pwa_result_is_valid(const struct PwaResult *r);

/**
 * # Safety
 * `r` must be NULL or a live handle.
 */
size_t pwa_result_iterations(const struct PwaResult *r);

/**
 * Cells of the final partition.
 *
 * # Safety
 * `r` must be NULL or a live handle.
 */
size_t pwa_result_num_cells(const struct PwaResult *r);

/**
 * Wall-clock seconds spent in the search.
 *
 * # Safety
 * `r` must be NULL or a live handle.
 */
double pwa_result_elapsed(const struct PwaResult *r);

/**
 * Final partition as a new handle.
 *
 * # Safety
 * `r` must be a live handle and `out` valid for writes.
 */
enum PwaStatus pwa_result_partition(const struct PwaResult *r, struct PwaPartition **out);

/**
 * Evaluates `V(x)` for a point `x` of length `dim`. Fails when the search
 * produced no candidate or `x` lies outside the domain.
 *
 * # Safety
 * `r` must be a live handle, `x` point to `dim` doubles and `value` be
 * valid for writes.
 */
enum PwaStatus pwa_result_value(const struct PwaResult *r,
                                const double *x,
                                size_t dim,
                                double *value);

/**
 * The certificate as a JSON string; release it with [`pwa_string_free`].
 *
 * # Safety
 * `r` must be a live handle and `out` valid for writes.
 */
enum PwaStatus pwa_result_certificate_json(const struct PwaResult *r, char **out);

/**
 * Writes `<stem>.final.json` and `<stem>.certificate.json` into `dir`.
 *
 * # Safety
 * `r` must be a live handle; `dir` and `stem` NUL-terminated strings.
 */
enum PwaStatus pwa_result_save(const struct PwaResult *r, const char *dir, const char *stem);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. NULL is ignored.
 */
void pwa_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PWA_LYAP_H */
