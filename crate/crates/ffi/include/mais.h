#ifndef MAIS_H
#define MAIS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by the fallible functions.
 */
typedef enum MaisStatus {
  MAIS_STATUS_OK = 0,
  MAIS_STATUS_NULL_POINTER = 1,
  MAIS_STATUS_INVALID_ARGUMENT = 2,
  MAIS_STATUS_CONFIG_ERROR = 3,
  MAIS_STATUS_RUNTIME_ERROR = 4,
  /**
   * The requested quantity does not exist, e.g. `Z` of the MCMC baseline.
   */
  MAIS_STATUS_UNAVAILABLE = 5,
  MAIS_STATUS_BUFFER_TOO_SMALL = 6,
  MAIS_STATUS_PANIC = 7,
} MaisStatus;

/**
 * Values accepted by [`mais_config_new`].
 */
typedef enum MaisAlgorithm {
  MAIS_ALGORITHM_STATIC_MIS = 0,
  MAIS_ALGORITHM_RWIS = 1,
  MAIS_ALGORITHM_POPULATION_MAIS = 2,
  MAIS_ALGORITHM_GAMIS = 3,
  MAIS_ALGORITHM_STANDARD_PMC = 4,
  MAIS_ALGORITHM_PARALLEL_MH = 5,
} MaisAlgorithm;

/**
 * Values accepted by [`mais_config_set_denominator`].
 */
typedef enum MaisDenominator {
  MAIS_DENOMINATOR_STANDARD = 0,
  MAIS_DENOMINATOR_SPATIAL = 1,
  MAIS_DENOMINATOR_TEMPORAL = 2,
  MAIS_DENOMINATOR_FULL = 3,
  /**
   * Mixtures over blocks of consecutive iterations.
   */
  MAIS_DENOMINATOR_TIME_BLOCKS = 4,
} MaisDenominator;

/**
 * Values accepted by [`mais_config_set_random_walk`].
 */
typedef enum MaisWalk {
  MAIS_WALK_PARALLEL_MH = 0,
  MAIS_WALK_BLOCK_MH = 1,
  MAIS_WALK_MH_WITHIN_GIBBS = 2,
} MaisWalk;

/**
 * A sampler configuration.
 */
typedef struct MaisConfig MaisConfig;

/**
 * The output of one run.
 */
typedef struct MaisResult MaisResult;

/**
 * A target density.
 */
typedef struct MaisTarget MaisTarget;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len` bytes) and returns the full message length plus one.
 * Call with `buf = NULL` to query the size.
 *
 * # Safety
 * `buf` must be NULL or point to `len` writable bytes.
 */
size_t mais_last_error_message(char *buf, size_t len);

/**
 * Creates a registered target by name (see `mais-bench list-targets`).
 * `dim` is used by `mixture-hd` only; pass 0 elsewhere. Returns NULL on
 * error.
 *
 * # Safety
 * `name` must be a valid NUL-terminated string.
 */
struct MaisTarget *mais_target_new(const char *name, size_t dim);

/**
 * # Safety
 * `target` must be NULL or a handle from [`mais_target_new`] not yet freed.
 */
void mais_target_free(struct MaisTarget *target);

/**
 * Dimension of the target, 0 for a NULL handle.
 *
 * # Safety
 * `target` must be NULL or a live handle.
 */
size_t mais_target_dim(const struct MaisTarget *target);

/**
 * Unnormalized log-density at `x`.
 *
 * # Safety
 * `target` must be a live handle, `x` must point to `len` doubles and `out`
 * to one writable double.
 */
enum MaisStatus mais_target_log_density(const struct MaisTarget *target,
                                        const double *x,
                                        size_t len,
                                        double *out);

/**
 * New configuration with `N` chains, `M` samples per chain and iteration,
 * and `T` iterations. Defaults: standard denominator, lower scale 1, means
 * uniform in `[-4, 4]^D`, seed 0. PMC starts with resampling adaptation,
 * the MCMC-driven algorithms with a parallel random walk of scale 1.
 * Returns NULL on error.
 *
 * # Safety
 * `target` must be a live handle. The configuration keeps its own
 * reference, so the target may be freed afterwards.
 */
struct MaisConfig *mais_config_new(const struct MaisTarget *target,
                                   uint32_t algorithm_code,
                                   size_t n,
                                   size_t m,
                                   size_t t);

/**
 * # Safety
 * `config` must be NULL or a live handle.
 */
void mais_config_free(struct MaisConfig *config);

/**
 * Sets the denominator. `width` is the block length for
 * `MAIS_DENOMINATOR_TIME_BLOCKS` and ignored otherwise.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum MaisStatus mais_config_set_denominator(struct MaisConfig *config, uint32_t code, size_t width);

/**
 * Isotropic lower-level proposal scale `σ`.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum MaisStatus mais_config_set_lower_sigma(struct MaisConfig *config, double sigma);

/**
 * Random-walk mean adaptation with isotropic scale `lambda`.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum MaisStatus mais_config_set_random_walk(struct MaisConfig *config,
                                            uint32_t code,
                                            double lambda);

/**
 * SMH mean adaptation with independent proposal `N(mean, sigma² I)`.
 *
 * # Safety
 * `config` must be a live handle and `mean` must point to `len` doubles.
 */
enum MaisStatus mais_config_set_smh(struct MaisConfig *config,
                                    const double *mean,
                                    size_t len,
                                    double sigma);

/**
 * Initial means drawn uniformly in the cube `[lo, hi]^D`.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum MaisStatus mais_config_set_init_box(struct MaisConfig *config, double lo, double hi);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum MaisStatus mais_config_set_seed(struct MaisConfig *config, uint64_t seed);

/**
 * Target evaluations the configured run will perform; 0 for NULL.
 *
 * # Safety
 * `config` must be NULL or a live handle.
 */
uint64_t mais_eval_budget(const struct MaisConfig *config);

/**
 * Runs the sampler and stores a new result handle in `*out`.
 *
 * # Safety
 * `config` must be a live handle and `out` a writable pointer.
 */
enum MaisStatus mais_run(const struct MaisConfig *config, struct MaisResult **out);

/**
 * # Safety
 * `result` must be NULL or a live handle.
 */
void mais_result_free(struct MaisResult *result);

/**
 * Length of the mean estimate; 0 for NULL.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
size_t mais_result_dim(const struct MaisResult *result);

/**
 * Copies the mean estimate into `out`, which holds `len` doubles.
 *
 * # Safety
 * `result` must be a live handle and `out` must point to `len` doubles.
 */
enum MaisStatus mais_result_mean(const struct MaisResult *result, double *out, size_t len);

/**
 * Normalizing-constant estimate; `MAIS_STATUS_UNAVAILABLE` for the MCMC
 * baseline.
 *
 * # Safety
 * `result` must be a live handle and `out` a writable pointer.
 */
enum MaisStatus mais_result_z(const struct MaisResult *result, double *out);

/**
 * Target evaluations performed by the iterations; 0 for NULL.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
uint64_t mais_result_eval_count(const struct MaisResult *result);

/**
 * Overflow-safe `log Σ exp(values[i])`.
 *
 * # Safety
 * `values` must point to `len` doubles and `out` to one writable double.
 */
enum MaisStatus mais_log_sum_exp(const double *values, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAIS_H */
