#ifndef DME_FFI_H
#define DME_FFI_H

/* Generated by cbindgen. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define DME_MODE_PROJECTED_DDG 0

#define DME_MODE_PLAIN_DDG 1

#define DME_MODE_CENTRAL_GAUSSIAN 2

#define DME_MODE_PLAIN_MEAN 3

typedef enum DmeStatus {
  DME_STATUS_OK = 0,
  DME_STATUS_NULL_POINTER = 1,
  DME_STATUS_INVALID_PARAMETER = 2,
  DME_STATUS_INFEASIBLE = 3,
  DME_STATUS_PROTOCOL = 4,
  DME_STATUS_NUMERICAL = 5,
  DME_STATUS_PANIC = 6,
} DmeStatus;

/**
 * Opaque secure-aggregation accumulator.
 */
typedef struct DmeAggregator DmeAggregator;

/**
 * Opaque estimation config.
 */
typedef struct DmeConfigHandle DmeConfigHandle;

/**
 * Per-round figures. The epsilons are NaN for non-private modes.
 */
typedef struct DmeRoundSummary {
  size_t m;
  uint64_t bits_per_client;
  uint32_t log2_modulus;
  double cdp_epsilon;
  double dp_epsilon;
} DmeRoundSummary;

/**
 * Mirror of `dme_core::ddg::DdgParams`.
 */
typedef struct DmeDdgParams {
  double c;
  double gamma;
  double sigma;
  double beta;
  uint64_t modulus;
  size_t dim;
} DmeDdgParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *dme_version(void);

/**
 * Length in bytes of the last error message on this thread, without the
 * terminating NUL; 0 when there is none.
 */
size_t dme_last_error_length(void);

/**
 * Copies the last error message into `buf` (truncated, always
 * NUL-terminated when `len > 0`) and returns the number of bytes written
 * before the NUL.
 *
 * # Safety
 * `buf` must be valid for `len` bytes of writes, or null with `len == 0`.
 */
size_t dme_last_error_message(char *buf, size_t len);

/**
 * Creates a config for `n` clients in dimension `d` with clip bound `c`
 * and per-round target `epsilon` (projected mode, automatic sketch size).
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum DmeStatus dme_config_new(size_t n,
                              size_t d,
                              double c,
                              double epsilon,
                              struct DmeConfigHandle **out);

/**
 * # Safety
 * `cfg` must come from [`dme_config_new`] and not be used afterwards.
 */
void dme_config_free(struct DmeConfigHandle *cfg);

/**
 * Selects one of the `DME_MODE_*` constants.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum DmeStatus dme_config_set_mode(struct DmeConfigHandle *cfg, uint32_t mode);

/**
 * Sets the sketch dimension; 0 restores the automatic choice.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum DmeStatus dme_config_set_sketch_dim(struct DmeConfigHandle *cfg, size_t m);

/**
 * Sets the number of sketch blocks.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum DmeStatus dme_config_set_rows(struct DmeConfigHandle *cfg, size_t t);

/**
 * Sets the δ at which the approximate-DP epsilon is reported.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum DmeStatus dme_config_set_delta(struct DmeConfigHandle *cfg, double delta);

/**
 * # Safety
 * `cfg` must be a live handle and `out` valid for a write.
 */
enum DmeStatus dme_config_bits_per_client(const struct DmeConfigHandle *cfg, uint64_t *out);

/**
 * Runs one round over `n_clients` row-major vectors of length `d` in `xs`,
 * writing the `d`-dimensional estimate to `estimate`.
 *
 * # Safety
 * `xs` must hold `n_clients · d` doubles, `estimate` room for `d`, and
 * `summary` may be null.
 */
enum DmeStatus dme_run_round(const struct DmeConfigHandle *cfg,
                             const double *xs,
                             size_t n_clients,
                             uint64_t seed,
                             double *estimate,
                             struct DmeRoundSummary *summary);

/**
 * DDG parameters meeting concentrated-DP target `epsilon` for `n` clients
 * in (padded) dimension `d_pad`, with wraparound probability `delta_wrap`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum DmeStatus dme_select_params(double c,
                                 size_t n,
                                 double epsilon,
                                 size_t d_pad,
                                 double delta_wrap,
                                 struct DmeDdgParams *out);

/**
 * Concentrated-DP epsilon of `params` aggregated over `n` clients.
 *
 * # Safety
 * `params` must be readable and `out` valid for a write.
 */
enum DmeStatus dme_ddg_epsilon(const struct DmeDdgParams *params, size_t n, double *out);

/**
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum DmeStatus dme_aggregator_new(uint64_t modulus, size_t dim, struct DmeAggregator **out);

/**
 * # Safety
 * `agg` must come from [`dme_aggregator_new`] and not be used afterwards.
 */
void dme_aggregator_free(struct DmeAggregator *agg);

/**
 * Adds one client message of `len` residues.
 *
 * # Safety
 * `agg` must be a live handle and `residues` hold `len` values.
 */
enum DmeStatus dme_aggregator_absorb(struct DmeAggregator *agg,
                                     const uint64_t *residues,
                                     size_t len);

/**
 * # Safety
 * `agg` must be a live handle and `out` valid for a write.
 */
enum DmeStatus dme_aggregator_client_count(const struct DmeAggregator *agg, size_t *out);

/**
 * Writes the running sum; `len` must equal the aggregator dimension.
 *
 * # Safety
 * `agg` must be a live handle and `out` hold `len` values.
 */
enum DmeStatus dme_aggregator_sum(const struct DmeAggregator *agg, uint64_t *out, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DME_FFI_H */
