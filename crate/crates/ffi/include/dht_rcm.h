#ifndef DHT_RCM_H
#define DHT_RCM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RcmStatus {
  RCM_STATUS_OK = 0,
  RCM_STATUS_NULL_POINTER = 1,
  RCM_STATUS_INVALID_ARGUMENT = 2,
  RCM_STATUS_DEGENERATE_DENOMINATOR = 3,
  RCM_STATUS_TOO_LARGE = 4,
  RCM_STATUS_SIMULATION_FAILED = 5,
  RCM_STATUS_PANIC = 6,
} RcmStatus;

typedef enum RcmGeometryKind {
  RCM_GEOMETRY_KIND_TREE = 0,
  RCM_GEOMETRY_KIND_HYPERCUBE = 1,
  RCM_GEOMETRY_KIND_XOR = 2,
  RCM_GEOMETRY_KIND_RING = 3,
  RCM_GEOMETRY_KIND_SYMPHONY = 4,
} RcmGeometryKind;

typedef enum RcmDenominator {
  RCM_DENOMINATOR_PAPER = 0,
  RCM_DENOMINATOR_EXACT = 1,
} RcmDenominator;

typedef enum RcmVerdict {
  RCM_VERDICT_SCALABLE = 0,
  RCM_VERDICT_UNSCALABLE = 1,
} RcmVerdict;

/**
 * Opaque geometry handle.
 */
typedef struct RcmGeometry RcmGeometry;

/**
 * Opaque overlay handle.
 */
typedef struct RcmOverlay RcmOverlay;

/**
 * Monte Carlo summary.
 */
typedef struct RcmSimResult {
  double routable_fraction;
  double std_error;
  uint64_t hop_cap_hits;
  uint32_t redrawn_trials;
} RcmSimResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static, NUL-terminated description of `status`.
 */
const char *rcm_status_message(enum RcmStatus status);

/**
 * Library version as a static, NUL-terminated string.
 */
const char *rcm_version(void);

/**
 * Creates a geometry handle. `k_n` and `k_s` only matter for Symphony.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum RcmStatus rcm_geometry_new(enum RcmGeometryKind kind,
                                uint32_t d,
                                uint32_t k_n,
                                uint32_t k_s,
                                struct RcmGeometry **out);

/**
 * # Safety
 * `geometry` must be null or a handle from [`rcm_geometry_new`] not yet freed.
 */
void rcm_geometry_free(struct RcmGeometry *geometry);

/**
 * Model routability at failure probability `q`.
 *
 * # Safety
 * `geometry` must be a live handle; `out` valid for an f64 write.
 */
enum RcmStatus rcm_routability(const struct RcmGeometry *geometry,
                               double q,
                               enum RcmDenominator denominator,
                               double *out);

/**
 * Per-phase failure probability `Q(m)`, `1 <= m <= d`.
 *
 * # Safety
 * `geometry` must be a live handle; `out` valid for an f64 write.
 */
enum RcmStatus rcm_phase_failure(const struct RcmGeometry *geometry,
                                 double q,
                                 uint32_t m,
                                 double *out);

/**
 * Probability that a route needing `h` hops survives, `h >= 1`.
 *
 * # Safety
 * `geometry` must be a live handle; `out` valid for an f64 write.
 */
enum RcmStatus rcm_path_success(const struct RcmGeometry *geometry,
                                double q,
                                uint32_t h,
                                double *out);

/**
 * Scalability verdict at `0 < q < 1` and the estimated limit of the path
 * success probability (0 for unscalable geometries).
 *
 * # Safety
 * `geometry` must be a live handle; `verdict` and `limit` valid for writes.
 */
enum RcmStatus rcm_classify(const struct RcmGeometry *geometry,
                            double q,
                            enum RcmVerdict *verdict,
                            double *limit);

/**
 * Monte Carlo routability; `seed` is split into build, failure and pair
 * seeds exactly as the command-line tool does.
 *
 * # Safety
 * `geometry` must be a live handle; `out` valid for an [`RcmSimResult`] write.
 */
enum RcmStatus rcm_simulate(const struct RcmGeometry *geometry,
                            double q,
                            uint32_t trials,
                            uint32_t pairs_per_trial,
                            uint64_t seed,
                            struct RcmSimResult *out);

/**
 * Builds a fully populated overlay (`d <= 20`).
 *
 * # Safety
 * `geometry` must be a live handle; `out` valid for a pointer write.
 */
enum RcmStatus rcm_overlay_build(const struct RcmGeometry *geometry,
                                 uint64_t build_seed,
                                 struct RcmOverlay **out);

/**
 * # Safety
 * `overlay` must be null or a handle from [`rcm_overlay_build`] not yet freed.
 */
void rcm_overlay_free(struct RcmOverlay *overlay);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `overlay` must be null or a live handle.
 */
uint32_t rcm_overlay_node_count(const struct RcmOverlay *overlay);

/**
 * Copies up to `capacity` neighbours of `node` into `buf` and writes the
 * full neighbour count to `len`. Pass `buf = NULL, capacity = 0` to query
 * the count.
 *
 * # Safety
 * `overlay` must be a live handle; `buf` valid for `capacity` u32 writes
 * unless `capacity` is 0; `len` valid for a write.
 */
enum RcmStatus rcm_overlay_neighbors(const struct RcmOverlay *overlay,
                                     uint32_t node,
                                     uint32_t *buf,
                                     size_t capacity,
                                     size_t *len);

/**
 * Routes `src -> dst` with the nodes in `dead[0..dead_len]` failed.
 * Writes whether the message arrived and the hops taken.
 *
 * # Safety
 * `overlay` must be a live handle; `dead` valid for `dead_len` reads (may
 * be null when `dead_len` is 0); `delivered` and `hops` valid for writes.
 */
enum RcmStatus rcm_route(const struct RcmOverlay *overlay,
                         const uint32_t *dead,
                         size_t dead_len,
                         uint32_t src,
                         uint32_t dst,
                         bool *delivered,
                         uint32_t *hops);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DHT_RCM_H */
