#ifndef COLLOCATE_H
#define COLLOCATE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum ClcStatus {
  CLC_STATUS_OK = 0,
  CLC_STATUS_NULL_POINTER = 1,
  CLC_STATUS_INVALID_ARGUMENT = 2,
  CLC_STATUS_DIMENSION_MISMATCH = 3,
  CLC_STATUS_OUTSIDE_SUPPORT = 4,
  CLC_STATUS_RANK_DEFICIENT = 5,
  CLC_STATUS_NOT_PRIME = 6,
  CLC_STATUS_DUPLICATE_POINTS = 7,
  CLC_STATUS_BUFFER_TOO_SMALL = 8,
  CLC_STATUS_IO = 9,
  CLC_STATUS_PARSE = 10,
  CLC_STATUS_PANIC = 11,
} ClcStatus;

typedef enum ClcFamily {
  CLC_FAMILY_CHEBYSHEV = 0,
  CLC_FAMILY_LEGENDRE = 1,
  CLC_FAMILY_HERMITE = 2,
} ClcFamily;

typedef enum ClcDensity {
  CLC_DENSITY_UNIFORM = 0,
  CLC_DENSITY_CHEBYSHEV = 1,
  CLC_DENSITY_GAUSSIAN = 2,
} ClcDensity;

typedef enum ClcIndexSetKind {
  CLC_INDEX_SET_KIND_TENSOR = 0,
  CLC_INDEX_SET_KIND_TOTAL_DEGREE = 1,
  CLC_INDEX_SET_KIND_HYPERBOLIC_CROSS = 2,
} ClcIndexSetKind;

typedef enum ClcSampler {
  CLC_SAMPLER_MC_UNIFORM = 0,
  CLC_SAMPLER_MC_CHEBYSHEV = 1,
  CLC_SAMPLER_MC_GAUSSIAN = 2,
  CLC_SAMPLER_WEIL = 3,
  CLC_SAMPLER_GAUSS_SUBSAMPLE = 4,
} ClcSampler;

/**
 * Opaque set of multi-indices.
 */
typedef struct ClcIndexSet ClcIndexSet;

/**
 * Opaque least orthogonal interpolation factorization.
 */
typedef struct ClcLoi ClcLoi;

/**
 * Opaque point set.
 */
typedef struct ClcMesh ClcMesh;

/**
 * Opaque polynomial surrogate.
 */
typedef struct ClcSurrogate ClcSurrogate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *clc_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated and
 * always NUL-terminated when `len > 0`). Returns the full message length
 * plus one, so a call with `len = 0` sizes the buffer. Returns 0 if no call
 * on this thread has failed.
 */
size_t clc_last_error(char *buf, size_t len);

/**
 * Builds a tensor, total-degree or hyperbolic-cross set.
 */
enum ClcStatus clc_index_set_new(uint32_t kind,
                                 size_t dimension,
                                 uint32_t degree,
                                 struct ClcIndexSet **out);

/**
 * Number of multi-indices; 0 for a null handle.
 */
size_t clc_index_set_len(const struct ClcIndexSet *set);

size_t clc_index_set_dimension(const struct ClcIndexSet *set);

/**
 * Writes the `i`-th multi-index (in the set's canonical order) to `degrees`,
 * which must hold `dimension` entries.
 */
enum ClcStatus clc_index_set_get(const struct ClcIndexSet *set,
                                 size_t i,
                                 uint32_t *degrees,
                                 size_t len);

void clc_index_set_free(struct ClcIndexSet *set);

/**
 * Wraps `count` row-major points of `dimension` coordinates.
 */
enum ClcStatus clc_mesh_from_points(size_t dimension,
                                    const double *points,
                                    size_t count,
                                    struct ClcMesh **out);

/**
 * Draws `count` points with a sampler. `candidate_degree` is the per-axis
 * grid degree for Gauss subsampling and is ignored otherwise.
 */
enum ClcStatus clc_mesh_sample(uint32_t sampler_kind,
                               size_t count,
                               size_t dimension,
                               uint64_t seed,
                               uint32_t candidate_degree,
                               struct ClcMesh **out);

/**
 * Weil points for a prime seed; `interior` skips the corner point `j = 0`.
 */
enum ClcStatus clc_mesh_weil(uint64_t prime, size_t dimension, bool interior, struct ClcMesh **out);

size_t clc_mesh_count(const struct ClcMesh *mesh);

size_t clc_mesh_dimension(const struct ClcMesh *mesh);

/**
 * Copies the row-major coordinates; `len` must be at least `count * dimension`.
 */
enum ClcStatus clc_mesh_points(const struct ClcMesh *mesh, double *out, size_t len);

void clc_mesh_free(struct ClcMesh *mesh);

/**
 * Least-squares fit of `values` (one per mesh point) in an isotropic basis.
 */
enum ClcStatus clc_least_squares(const struct ClcMesh *mesh,
                                 const struct ClcIndexSet *set,
                                 uint32_t family_kind,
                                 const double *values,
                                 size_t len,
                                 struct ClcSurrogate **out);

/**
 * Least squares with Christoffel-type weights for the target `density`.
 */
enum ClcStatus clc_weighted_least_squares(const struct ClcMesh *mesh,
                                          const struct ClcIndexSet *set,
                                          uint32_t family_kind,
                                          uint32_t density_kind,
                                          const double *values,
                                          size_t len,
                                          struct ClcSurrogate **out);

/**
 * ℓ1 recovery with residual budget `epsilon` (0 for exact interpolation).
 * `preconditioned` rescales rows for Chebyshev-distributed meshes. The
 * solver's convergence flag is written to `converged` when it is non-null;
 * the surrogate is returned either way.
 */
enum ClcStatus clc_sparse_recover(const struct ClcMesh *mesh,
                                  const struct ClcIndexSet *set,
                                  uint32_t family_kind,
                                  const double *values,
                                  size_t len,
                                  double epsilon,
                                  bool preconditioned,
                                  bool *converged,
                                  struct ClcSurrogate **out);

size_t clc_surrogate_len(const struct ClcSurrogate *s);

size_t clc_surrogate_dimension(const struct ClcSurrogate *s);

/**
 * Copies the coefficients, ordered like the index set.
 */
enum ClcStatus clc_surrogate_coefficients(const struct ClcSurrogate *s, double *out, size_t len);

/**
 * Evaluates at `count` row-major points, writing `count` values.
 */
enum ClcStatus clc_surrogate_eval(const struct ClcSurrogate *s,
                                  const double *points,
                                  size_t count,
                                  double *out);

void clc_surrogate_free(struct ClcSurrogate *s);

/**
 * Least orthogonal interpolation factorization of a mesh. A `max_degree`
 * of 0 selects the default cap.
 */
enum ClcStatus clc_loi_factorize(const struct ClcMesh *mesh,
                                 uint32_t density_kind,
                                 uint32_t max_degree,
                                 struct ClcLoi **out);

/**
 * Polynomial degree of the interpolation space; 0 for a null handle.
 */
uint32_t clc_loi_degree(const struct ClcLoi *loi);

/**
 * Interpolates `values` given at the factorized mesh.
 */
enum ClcStatus clc_loi_interpolate(const struct ClcLoi *loi,
                                   const double *values,
                                   size_t len,
                                   struct ClcSurrogate **out);

/**
 * Lebesgue constant estimated as a maximum over the candidate points.
 * `weighted` uses the factorization's density as the weight `ρ` in
 * `max_z ρ(z) Σ_m |ℓ_m(z)| / ρ(z_m)`; otherwise `ρ ≡ 1`.
 */
enum ClcStatus clc_loi_lebesgue(const struct ClcLoi *loi,
                                const struct ClcMesh *candidates,
                                bool weighted,
                                double *out);

void clc_loi_free(struct ClcLoi *loi);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COLLOCATE_H */
