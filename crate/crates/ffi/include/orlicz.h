#ifndef ORLICZ_H
#define ORLICZ_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum OrliczStatus {
  ORLICZ_STATUS_OK = 0,
  ORLICZ_STATUS_NULL_POINTER = 1,
  ORLICZ_STATUS_INVALID_ARGUMENT = 2,
  ORLICZ_STATUS_PRECONDITION = 3,
  ORLICZ_STATUS_NON_FINITE = 4,
  ORLICZ_STATUS_BUFFER_TOO_SMALL = 5,
  ORLICZ_STATUS_IO = 6,
  ORLICZ_STATUS_PANIC = 7,
} OrliczStatus;

typedef struct OrliczGrid OrliczGrid;

typedef struct OrliczPhi OrliczPhi;

typedef struct OrliczSubspace OrliczSubspace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread. Empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *orlicz_last_error(void);

/**
 * `Φ(x) = x^p`, `p ≥ 1`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum OrliczStatus orlicz_phi_power(double p, struct OrliczPhi **out);

/**
 * Affine with slope `k` on `[0, c]`, then `k x + (x − c)^p / p`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum OrliczStatus orlicz_phi_linear_then_convex(double k,
                                                double c,
                                                double p,
                                                struct OrliczPhi **out);

/**
 * Adds jumps of size `size` at `2⁻¹, …, 2⁻ⁿ` to the generator of `base`.
 *
 * # Safety
 * `base` must be a live handle and `out` a valid pointer.
 */
enum OrliczStatus orlicz_phi_staircase(const struct OrliczPhi *base,
                                       size_t n_jumps,
                                       double size,
                                       struct OrliczPhi **out);

/**
 * # Safety
 * `phi` must be null or a handle not freed before.
 */
void orlicz_phi_free(struct OrliczPhi *phi);

/**
 * # Safety
 * `phi` must be a live handle and `out` a valid pointer.
 */
enum OrliczStatus orlicz_phi_value(const struct OrliczPhi *phi, double x, double *out);

/**
 * Right derivative `φ⁺(x)`.
 *
 * # Safety
 * `phi` must be a live handle and `out` a valid pointer.
 */
enum OrliczStatus orlicz_phi_right(const struct OrliczPhi *phi, double x, double *out);

/**
 * Left derivative `φ⁻(x)`; fails with `Precondition` at `x = 0`.
 *
 * # Safety
 * `phi` must be a live handle and `out` a valid pointer.
 */
enum OrliczStatus orlicz_phi_left(const struct OrliczPhi *phi, double x, double *out);

/**
 * Midpoint grid on `[a, b]` with equality band `equality_tol > 0`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum OrliczStatus orlicz_grid_uniform(double a,
                                      double b,
                                      size_t n_nodes,
                                      double equality_tol,
                                      struct OrliczGrid **out);

/**
 * # Safety
 * `grid` must be null or a handle not freed before.
 */
void orlicz_grid_free(struct OrliczGrid *grid);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `grid` must be null or a live handle.
 */
size_t orlicz_grid_len(const struct OrliczGrid *grid);

/**
 * Copies the nodes into `buf`, which must hold `orlicz_grid_len` values.
 *
 * # Safety
 * `grid` must be a live handle and `buf` valid for `len` writes.
 */
enum OrliczStatus orlicz_grid_nodes(const struct OrliczGrid *grid, double *buf, size_t len);

/**
 * `span{1, x, …, x^(n−1)}` on `grid`.
 *
 * # Safety
 * `grid` must be a live handle and `out` a valid pointer.
 */
enum OrliczStatus orlicz_subspace_monomial(const struct OrliczGrid *grid,
                                           size_t n,
                                           struct OrliczSubspace **out);

/**
 * Piecewise-linear hats on strictly increasing `knots`.
 *
 * # Safety
 * `grid` must be a live handle, `knots` valid for `n_knots` reads and `out` a
 * valid pointer.
 */
enum OrliczStatus orlicz_subspace_hat(const struct OrliczGrid *grid,
                                      const double *knots,
                                      size_t n_knots,
                                      struct OrliczSubspace **out);

/**
 * # Safety
 * `s` must be null or a handle not freed before.
 */
void orlicz_subspace_free(struct OrliczSubspace *s);

/**
 * Dimension, or 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t orlicz_subspace_dim(const struct OrliczSubspace *s);

/**
 * `Σ wᵢ Φ(|gᵢ|)` for node values `g`.
 *
 * # Safety
 * Handles must be live, `values` valid for `len` reads, `out` valid.
 */
enum OrliczStatus orlicz_modular(const struct OrliczPhi *phi,
                                 const struct OrliczGrid *grid,
                                 const double *values,
                                 size_t len,
                                 double *out);

/**
 * Best approximation of `f` from `s` with default solver settings and the
 * given seed. `coeffs` must hold `orlicz_subspace_dim(s)` values.
 *
 * # Safety
 * Handles must be live; `f` valid for `len` reads; `coeffs` valid for
 * `coeffs_len` writes; `modular_value` and `converged` valid or null.
 */
enum OrliczStatus orlicz_solve(const struct OrliczPhi *phi,
                               const struct OrliczSubspace *s,
                               const double *f,
                               size_t len,
                               uint64_t seed,
                               double *coeffs,
                               size_t coeffs_len,
                               double *modular_value,
                               bool *converged);

/**
 * Checks the characterization at `P = Σ coeffs_j δ_j`. A nonpositive `tol`
 * selects the default `10⁻⁴·(1 + modular)`.
 *
 * # Safety
 * Handles must be live; `f` valid for `len` reads; `coeffs` valid for
 * `n_coeffs` reads; `verdict` valid; `min_margin` valid or null.
 */
enum OrliczStatus orlicz_certify(const struct OrliczPhi *phi,
                                 const struct OrliczSubspace *s,
                                 const double *f,
                                 size_t len,
                                 const double *coeffs,
                                 size_t n_coeffs,
                                 double tol,
                                 uint64_t seed,
                                 bool *verdict,
                                 double *min_margin);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORLICZ_H */
