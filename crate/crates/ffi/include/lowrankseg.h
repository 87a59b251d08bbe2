#ifndef LOWRANKSEG_H
#define LOWRANKSEG_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible function.
typedef enum LrsStatus {
  LRS_STATUS_OK = 0,
  LRS_STATUS_NULL_POINTER = 1,
  LRS_STATUS_DIMENSION = 2,
  LRS_STATUS_SYMMETRY = 3,
  LRS_STATUS_PARAMETER = 4,
  LRS_STATUS_NON_FINITE = 5,
  LRS_STATUS_DIVERGENCE = 6,
  LRS_STATUS_DECOMPOSITION = 7,
  LRS_STATUS_PARSE = 8,
  LRS_STATUS_IO = 9,
  LRS_STATUS_INVALID_UTF8 = 10,
  LRS_STATUS_BUFFER_TOO_SMALL = 11,
  LRS_STATUS_PANIC = 12,
} LrsStatus;

typedef enum LrsCorruptionModel {
  LRS_CORRUPTION_MODEL_RANDOM_ENTRIES = 0,
  LRS_CORRUPTION_MODEL_SAMPLE_SPECIFIC = 1,
} LrsCorruptionModel;

typedef enum LrsNormKind {
  LRS_NORM_KIND_NUCLEAR = 0,
  LRS_NORM_KIND_FROBENIUS = 1,
  LRS_NORM_KIND_OPERATOR = 2,
  LRS_NORM_KIND_L1 = 3,
  LRS_NORM_KIND_L21 = 4,
} LrsNormKind;

typedef enum LrsNoiseNorm {
  LRS_NOISE_NORM_L1 = 0,
  LRS_NOISE_NORM_L21 = 1,
} LrsNoiseNorm;

typedef enum LrsAffinityMode {
  LRS_AFFINITY_MODE_ABS_SYM = 0,
  LRS_AFFINITY_MODE_PSD_DIRECT = 1,
} LrsAffinityMode;

// Opaque dense matrix.
typedef struct LrsMat LrsMat;

// Opaque solver output.
typedef struct LrsSolveResult LrsSolveResult;

typedef struct LrsToyParams {
  uint64_t seed;
  size_t num_subspaces;
  size_t subspace_dim;
  size_t ambient_dim;
  size_t samples_per;
} LrsToyParams;

typedef struct LrsCorruptionSpec {
  enum LrsCorruptionModel model;
  double fraction;
  double sigma_scale;
  uint64_t seed;
} LrsCorruptionSpec;

// Solver hyperparameters; start from [`lrs_alm_config_default`].
typedef struct LrsAlmConfig {
  double lambda;
  enum LrsNoiseNorm noise_norm;
  double mu0;
  double rho;
  double mu_max;
  double tol;
  size_t max_iter;
  bool psd;
} LrsAlmConfig;

// Seconds spent in each solver sub-step.
typedef struct LrsStepTiming {
  double z_step;
  double e_step;
  double j_step;
  double multiplier_step;
} LrsStepTiming;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a successful call.
// The pointer stays valid until the next call into this library on the same thread.
const char *lrs_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *lrs_version(void);

// Copies `rows × cols` row-major values into a new matrix.
//
// # Safety
// `data` must point to `rows * cols` readable doubles; `out` must be writable.
enum LrsStatus lrs_mat_new(size_t rows, size_t cols, const double *data, struct LrsMat **out);

// # Safety
// `out` must be writable.
enum LrsStatus lrs_mat_zeros(size_t rows, size_t cols, struct LrsMat **out);

// Releases a matrix; NULL is ignored.
//
// # Safety
// `m` must be NULL or a handle from this library that has not been freed.
void lrs_mat_free(struct LrsMat *m);

// Row count, or 0 for NULL.
//
// # Safety
// `m` must be NULL or a live handle.
size_t lrs_mat_rows(const struct LrsMat *m);

// Column count, or 0 for NULL.
//
// # Safety
// `m` must be NULL or a live handle.
size_t lrs_mat_cols(const struct LrsMat *m);

// Copies the entries in row-major order into `buf` (at least `rows * cols` long).
//
// # Safety
// `m` must be a live handle; `buf` must point to `len` writable doubles.
enum LrsStatus lrs_mat_copy_to(const struct LrsMat *m, double *buf, size_t len);

// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum LrsStatus lrs_mat_load(const char *path, struct LrsMat **out);

// # Safety
// `m` must be a live handle; `path` must be a NUL-terminated string.
enum LrsStatus lrs_mat_save(const struct LrsMat *m, const char *path);

// Default synthetic dataset shape for `seed`: 5 subspaces of dimension 4 in R^100, 20 samples each.
struct LrsToyParams lrs_toy_params_default(uint64_t seed);

// Generates the synthetic dataset. `labels` may be NULL; otherwise it receives one
// label per sample and must hold at least `num_subspaces * samples_per` entries.
//
// # Safety
// `params` must be readable, `x_out` writable, and `labels` NULL or `labels_len` writable entries.
enum LrsStatus lrs_generate_toy(const struct LrsToyParams *params,
                                struct LrsMat **x_out,
                                size_t *labels,
                                size_t labels_len);

// Returns a corrupted copy of `x`.
//
// # Safety
// `x` must be a live handle, `spec` readable and `out` writable.
enum LrsStatus lrs_corrupt(const struct LrsMat *x,
                           const struct LrsCorruptionSpec *spec,
                           struct LrsMat **out);

// # Safety
// `a` must be a live handle; `out` must be writable.
enum LrsStatus lrs_norm(const struct LrsMat *a, enum LrsNormKind kind, double *out);

// # Safety
// `a` must be a live handle; `out` must be writable.
enum LrsStatus lrs_numerical_rank(const struct LrsMat *a, double rel_tol, size_t *out);

// Eigenvalues of a symmetric matrix, descending, into `values` (length ≥ n).
//
// # Safety
// `s` must be a live handle; `values` must point to `len` writable doubles.
enum LrsStatus lrs_eig_sym_values(const struct LrsMat *s,
                                  double symmetry_tol,
                                  double *values,
                                  size_t len);

// Singular values, descending, into `values` (length ≥ min(rows, cols)).
//
// # Safety
// `a` must be a live handle; `values` must point to `len` writable doubles.
enum LrsStatus lrs_singular_values(const struct LrsMat *a, double *values, size_t len);

// Row-space projector: the clean-data minimizer of the nuclear norm subject to `X = XZ`.
//
// # Safety
// `x` must be a live handle; `out` must be writable.
enum LrsStatus lrs_lrr_closed_form(const struct LrsMat *x, struct LrsMat **out);

// Singular value thresholding.
//
// # Safety
// `g` must be a live handle; `out` must be writable.
enum LrsStatus lrs_svt(const struct LrsMat *g, double tau, struct LrsMat **out);

// Nuclear-norm proximal map on the PSD cone via eigenvalue thresholding.
//
// # Safety
// `g` must be a live handle; `out` must be writable.
enum LrsStatus lrs_psd_eig_threshold(const struct LrsMat *g, double tau, struct LrsMat **out);

// # Safety
// `g` must be a live handle; `out` must be writable.
enum LrsStatus lrs_shrink_l1(const struct LrsMat *g, double tau, struct LrsMat **out);

// # Safety
// `g` must be a live handle; `out` must be writable.
enum LrsStatus lrs_shrink_l21(const struct LrsMat *g, double tau, struct LrsMat **out);

struct LrsAlmConfig lrs_alm_config_default(void);

// Runs the inexact ALM solver. Reaching `max_iter` is not an error: check
// [`lrs_solve_result_converged`].
//
// # Safety
// `x` must be a live handle, `cfg` readable and `out` writable.
enum LrsStatus lrs_solve(const struct LrsMat *x,
                         const struct LrsAlmConfig *cfg,
                         struct LrsSolveResult **out);

// # Safety
// `r` must be NULL or a result from [`lrs_solve`] that has not been freed.
void lrs_solve_result_free(struct LrsSolveResult *r);

// Copies the representation `Z` (`n × n`) into a new matrix.
//
// # Safety
// `r` must be a live result; `out` must be writable.
enum LrsStatus lrs_solve_result_z(const struct LrsSolveResult *r, struct LrsMat **out);

// Copies the noise estimate `E` (`d × n`) into a new matrix.
//
// # Safety
// `r` must be a live result; `out` must be writable.
enum LrsStatus lrs_solve_result_e(const struct LrsSolveResult *r, struct LrsMat **out);

// Iteration count, or 0 for NULL.
//
// # Safety
// `r` must be NULL or a live result.
size_t lrs_solve_result_iterations(const struct LrsSolveResult *r);

// Whether both residuals reached the tolerance; false for NULL.
//
// # Safety
// `r` must be NULL or a live result.
bool lrs_solve_result_converged(const struct LrsSolveResult *r);

// # Safety
// `r` must be a live result; `out` must be writable.
enum LrsStatus lrs_solve_result_timing(const struct LrsSolveResult *r, struct LrsStepTiming *out);

// Symmetric nonnegative affinity from a representation.
//
// # Safety
// `z` must be a live handle; `out` must be writable.
enum LrsStatus lrs_affinity(const struct LrsMat *z, enum LrsAffinityMode mode, struct LrsMat **out);

// Gaussian kernel between the columns of `x`.
//
// # Safety
// `x` must be a live handle; `out` must be writable.
enum LrsStatus lrs_gaussian_affinity(const struct LrsMat *x, double sigma, struct LrsMat **out);

// Nonnegative linear kernel between the columns of `x`.
//
// # Safety
// `x` must be a live handle; `out` must be writable.
enum LrsStatus lrs_linear_affinity(const struct LrsMat *x, struct LrsMat **out);

// Normalized spectral clustering of an `n × n` affinity; writes `n` labels in `[0, k)`.
//
// # Safety
// `w` must be a live handle; `labels` must point to `len` writable entries.
enum LrsStatus lrs_spectral_cluster(const struct LrsMat *w,
                                    size_t k,
                                    uint64_t seed,
                                    size_t *labels,
                                    size_t len);

// Best-matching fraction of agreeing labels.
//
// # Safety
// `pred` and `truth` must point to `len` readable entries; `out` must be writable.
enum LrsStatus lrs_segmentation_accuracy(const size_t *pred,
                                         const size_t *truth,
                                         size_t len,
                                         double *out);

// Fraction of `Σ|z_ij|` inside consecutive diagonal blocks of the given sizes.
//
// # Safety
// `z` must be a live handle, `sizes` must point to `groups` readable entries and `out` must be writable.
enum LrsStatus lrs_block_diagonal_mass(const struct LrsMat *z,
                                       const size_t *sizes,
                                       size_t groups,
                                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOWRANKSEG_H */
