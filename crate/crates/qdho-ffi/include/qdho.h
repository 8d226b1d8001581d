#ifndef QDHO_H
#define QDHO_H

/* Generated by cbindgen from qdho-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum QdhoStatus {
  QDHO_STATUS_OK = 0,
  QDHO_STATUS_NULL_POINTER = 1,
  QDHO_STATUS_INVALID_ARGUMENT = 2,
  QDHO_STATUS_DOMAIN = 3,
  QDHO_STATUS_PRECONDITION = 4,
  QDHO_STATUS_MODEL_VALIDITY = 5,
  QDHO_STATUS_NUMERICAL = 6,
  QDHO_STATUS_RESOURCE = 7,
  QDHO_STATUS_CONFIG = 8,
  QDHO_STATUS_IO = 9,
} QdhoStatus;

/**
 * Opaque physical configuration handle.
 */
typedef struct QdhoConfig QdhoConfig;

/**
 * Opaque transition/exchange rate handle.
 */
typedef struct QdhoRate QdhoRate;

/**
 * Opaque sampled-trajectory handle.
 */
typedef struct QdhoTrajectory QdhoTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *qdho_status_message(enum QdhoStatus status);

/**
 * Library version string.
 */
const char *qdho_version(void);

/**
 * Build a configuration; fails on invalid parameters (m ≤ 0, cutoff ≤
 * omega, ...).
 *
 * # Safety
 * `out` must be a valid pointer; the returned handle must be released with
 * [`qdho_config_free`].
 */
enum QdhoStatus qdho_config_new(double m,
                                double omega,
                                double e,
                                double beta,
                                double temperature,
                                double cutoff,
                                struct QdhoConfig **out);

/**
 * Release a configuration handle. Null is a no-op.
 *
 * # Safety
 * `cfg` must come from [`qdho_config_new`] and not have been freed.
 */
void qdho_config_free(struct QdhoConfig *cfg);

/**
 * Radiation-reaction time constant τ = e²/(6πm).
 *
 * # Safety
 * `cfg` and `out` must be valid pointers.
 */
enum QdhoStatus qdho_config_tau(const struct QdhoConfig *cfg, double *out);

/**
 * Ohmic coupling strength |f(ω)|² = β/(4π²ω³).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QdhoStatus qdho_coupling_special(double beta, double omega, double *out);

/**
 * Mean thermal occupation n̄(ω, T); exactly 0 at T = 0.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QdhoStatus qdho_bose_occupation(double omega, double temperature, double *out);

/**
 * Transversality sum Σ_λ ε_x² = 1 − k̂_x² for a unit direction.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QdhoStatus qdho_polarization_sum_x(double dx, double dy, double dz, double *out);

/**
 * Memory kernel γ(t) for the configuration's Ohmic coupling and cutoff.
 *
 * # Safety
 * `cfg` and `out` must be valid pointers.
 */
enum QdhoStatus qdho_kernel_gamma(const struct QdhoConfig *cfg,
                                  double t,
                                  size_t quadrature_points,
                                  double *out);

/**
 * First-order transition rate between adjacent oscillator levels.
 *
 * `direction`: 0 = down, 1 = up. Bath kinds: 0 = vacuum, 1 = thermal
 * (uses the matching temperature argument), 2 = Fock. Field Fock quanta
 * are packed 5 doubles each (dx, dy, dz, lambda, omega_p); reservoir
 * quanta one double each (omega_p).
 *
 * # Safety
 * Pointers must be valid; `out` receives a handle to release with
 * [`qdho_rate_free`].
 */
enum QdhoStatus qdho_transition_rate(const struct QdhoConfig *cfg,
                                     uint32_t n,
                                     int direction,
                                     int field_kind,
                                     double field_temperature,
                                     const double *field_quanta,
                                     size_t field_count,
                                     int reservoir_kind,
                                     double reservoir_temperature,
                                     const double *reservoir_quanta,
                                     size_t reservoir_count,
                                     struct QdhoRate **out);

/**
 * Vacuum↔reservoir exchange rate for one photon mode.
 *
 * `mode`: 0 = the photon is absorbed by the reservoir, 1 = the reservoir
 * emits into the photon mode. `photon` is 5 doubles (dx, dy, dz, lambda,
 * omega_p).
 *
 * # Safety
 * Pointers must be valid; `out` receives a handle to release with
 * [`qdho_rate_free`].
 */
enum QdhoStatus qdho_exchange_rate(const struct QdhoConfig *cfg,
                                   int mode,
                                   const double *photon,
                                   int reservoir_kind,
                                   double reservoir_temperature,
                                   const double *reservoir_quanta,
                                   size_t reservoir_count,
                                   struct QdhoRate **out);

/**
 * Smooth per-unit-time part of a rate.
 *
 * # Safety
 * `rate` and `out` must be valid pointers.
 */
enum QdhoStatus qdho_rate_smooth(const struct QdhoRate *rate, double *out);

/**
 * Number of Dirac-mass resonance terms.
 *
 * # Safety
 * `rate` and `out` must be valid pointers.
 */
enum QdhoStatus qdho_rate_resonance_count(const struct QdhoRate *rate, size_t *out);

/**
 * Location and weight of one resonance term.
 *
 * # Safety
 * Pointers must be valid.
 */
enum QdhoStatus qdho_rate_resonance(const struct QdhoRate *rate,
                                    size_t index,
                                    double *out_location,
                                    double *out_weight);

/**
 * Broadened transition probability smooth·t + Σ w·K_η(loc − ω_ref)·t.
 *
 * `kernel_shape`: 0 = boxcar, 1 = Lorentzian. `out_clamped` becomes 1 when
 * the value exceeded the first-order validity limit 0.1 and was clamped.
 *
 * # Safety
 * Pointers must be valid.
 */
enum QdhoStatus qdho_rate_evaluate(const struct QdhoRate *rate,
                                   double t,
                                   double eta,
                                   int kernel_shape,
                                   double omega_ref,
                                   double *out_probability,
                                   int *out_clamped);

/**
 * Release a rate handle. Null is a no-op.
 *
 * # Safety
 * `rate` must come from a rate constructor and not have been freed.
 */
void qdho_rate_free(struct QdhoRate *rate);

/**
 * Integrate a trajectory from (q0, v0) to t_end with step h.
 *
 * `solver`: 0 = Markovian, 1 = non-Markovian (memory kernel from the
 * configured cutoff; `quadrature_points` ≥ 64), 2 = radiation reaction.
 *
 * # Safety
 * Pointers must be valid; `out` receives a handle to release with
 * [`qdho_trajectory_free`].
 */
enum QdhoStatus qdho_solve(const struct QdhoConfig *cfg,
                           int solver,
                           size_t quadrature_points,
                           double q0,
                           double v0,
                           double t_end,
                           double h,
                           struct QdhoTrajectory **out);

/**
 * Number of samples in a trajectory.
 *
 * # Safety
 * Pointers must be valid.
 */
enum QdhoStatus qdho_trajectory_len(const struct QdhoTrajectory *traj, size_t *out);

/**
 * One sample (t, q, q̇) of a trajectory.
 *
 * # Safety
 * Pointers must be valid.
 */
enum QdhoStatus qdho_trajectory_sample(const struct QdhoTrajectory *traj,
                                       size_t index,
                                       double *out_t,
                                       double *out_q,
                                       double *out_qdot);

/**
 * Release a trajectory handle. Null is a no-op.
 *
 * # Safety
 * `traj` must come from [`qdho_solve`] and not have been freed.
 */
void qdho_trajectory_free(struct QdhoTrajectory *traj);

/**
 * First-step oracle run: discretize the selected baths over
 * [band_lo, band_hi] (absolute frequencies), evolve exactly, fit the
 * transfer slope over [t_lo, t_hi] and report it next to the analytic
 * slope.
 *
 * `bath`: 0 = reservoir, 1 = field, 2 = both.
 *
 * # Safety
 * Pointers must be valid.
 */
enum QdhoStatus qdho_oracle_run(const struct QdhoConfig *cfg,
                                int bath,
                                uint32_t n,
                                size_t modes,
                                double band_lo,
                                double band_hi,
                                double t_lo,
                                double t_hi,
                                size_t steps,
                                double *out_fitted,
                                double *out_analytic);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QDHO_H */
