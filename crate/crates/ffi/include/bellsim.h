#ifndef BELLSIM_H
#define BELLSIM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BellsimStatus {
  BELLSIM_STATUS_OK = 0,
  BELLSIM_STATUS_NULL_POINTER = 1,
  BELLSIM_STATUS_INVALID_ARGUMENT = 2,
  /**
   * No double passes were counted, so the correlation is undefined.
   */
  BELLSIM_STATUS_UNDEFINED = 3,
  BELLSIM_STATUS_PANIC = 4,
} BellsimStatus;

typedef enum BellsimPairing {
  BELLSIM_PAIRING_HEAD_TO_TOE = 0,
  BELLSIM_PAIRING_BACK_TO_BACK = 1,
} BellsimPairing;

typedef enum BellsimParticle {
  BELLSIM_PARTICLE_SPIN_HALF = 0,
  BELLSIM_PARTICLE_PHOTON = 1,
} BellsimParticle;

/**
 * Opaque correlation curve.
 */
typedef struct BellsimCurve BellsimCurve;

/**
 * Opaque aperture model.
 */
typedef struct BellsimModel BellsimModel;

/**
 * Run size and randomness. `shards == 0` selects the default.
 */
typedef struct BellsimRunParams {
  uint64_t pairs;
  uint64_t seed;
  uint32_t shards;
} BellsimRunParams;

/**
 * Post-selected correlation estimate. When `defined` is false, `e`, `rate`
 * and `std_error` are NaN.
 */
typedef struct BellsimEstimate {
  uint64_t n_pairs;
  uint64_t n_coincident;
  uint64_t n_same;
  uint64_t n_diff;
  double e;
  double rate;
  double std_error;
  bool defined;
} BellsimEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *bellsim_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bellsim_version(void);

/**
 * Builds a model from an aperture spec: `figure-eight`, `rose`,
 * `circle:<d>` or `slit:<eps>`.
 *
 * # Safety
 * `aperture` must be a NUL-terminated string; `out` must be writable.
 */
enum BellsimStatus bellsim_model_new(const char *aperture,
                                     enum BellsimPairing pairing,
                                     struct BellsimModel **out);

/**
 * # Safety
 * `model` must come from `bellsim_model_new` and not be freed twice. Null is ignored.
 */
void bellsim_model_free(struct BellsimModel *model);

/**
 * Pass probability of a knife misaligned by `misalignment_deg` from the axis.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum BellsimStatus bellsim_clearance(const struct BellsimModel *model,
                                     double misalignment_deg,
                                     double *out);

/**
 * Monte Carlo estimate at one pair of target settings. Returns
 * `UNDEFINED` (with `out` still filled) if no pair passed both sides.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum BellsimStatus bellsim_run_fixed(const struct BellsimModel *model,
                                     double left_deg,
                                     double right_deg,
                                     struct BellsimRunParams params,
                                     struct BellsimEstimate *out);

/**
 * Sweeps the right target over `start..=end` by `step` with the left at 0°.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum BellsimStatus bellsim_run_sweep(const struct BellsimModel *model,
                                     double start_deg,
                                     double end_deg,
                                     double step_deg,
                                     struct BellsimRunParams params,
                                     struct BellsimCurve **out);

/**
 * Number of points in a curve; 0 for null.
 *
 * # Safety
 * `curve` must be a live handle or null.
 */
size_t bellsim_curve_len(const struct BellsimCurve *curve);

/**
 * Point `index` of a curve.
 *
 * # Safety
 * `curve` must be a live handle; `theta_deg` and `out` must be writable.
 */
enum BellsimStatus bellsim_curve_get(const struct BellsimCurve *curve,
                                     size_t index,
                                     double *theta_deg,
                                     struct BellsimEstimate *out);

/**
 * # Safety
 * `curve` must come from `bellsim_run_sweep` and not be freed twice. Null is ignored.
 */
void bellsim_curve_free(struct BellsimCurve *curve);

/**
 * Deterministic correlation at separation `theta_deg` by quadrature over the
 * hidden angle. `rho_steps == 0` selects the default grid.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum BellsimStatus bellsim_quadrature_correlation(const struct BellsimModel *model,
                                                  double theta_deg,
                                                  size_t rho_steps,
                                                  double *out);

/**
 * CHSH statistic from four Monte Carlo runs at settings `a1, b1 | c2, d2`.
 *
 * # Safety
 * `model` must be a live handle; `s` and `std_error` must be writable.
 */
enum BellsimStatus bellsim_chsh(const struct BellsimModel *model,
                                double a1_deg,
                                double b1_deg,
                                double c2_deg,
                                double d2_deg,
                                struct BellsimRunParams params,
                                double *s,
                                double *std_error);

/**
 * Quantum correlation at separation `theta_deg`.
 *
 * # Safety
 * `out` must be writable.
 */
enum BellsimStatus bellsim_qm_correlation(enum BellsimParticle particle,
                                          double theta_deg,
                                          double *out);

/**
 * Exact overall match probability of the instruction-set model for three
 * distinct settings, as a reduced fraction.
 *
 * # Safety
 * `numerator` and `denominator` must be writable.
 */
enum BellsimStatus bellsim_program_overall(double o1_deg,
                                           double o2_deg,
                                           double o3_deg,
                                           uint64_t *numerator,
                                           uint64_t *denominator);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BELLSIM_H */
