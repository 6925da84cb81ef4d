#ifndef SEASONAL_DRIFT_H
#define SEASONAL_DRIFT_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum {
  SD_STATUS_OK = 0,
  SD_STATUS_NULL_POINTER = 1,
  SD_STATUS_INVALID_PARAMETER = 2,
  SD_STATUS_DOMAIN = 3,
  SD_STATUS_NO_CONVERGENCE = 4,
  SD_STATUS_UNSUPPORTED = 5,
  SD_STATUS_BUFFER_TOO_SMALL = 6,
  SD_STATUS_IO = 7,
  SD_STATUS_PANIC = 8,
} SdStatus;

// A simulated chain of seasons.
typedef struct SdChain SdChain;

// Pair distribution of drift and transmissibility.
typedef struct SdDistribution SdDistribution;

// Exact analysis for immunity memory `r = 2`.
typedef struct SdR2Model SdR2Model;

// Immunity state of the population entering a season.
typedef struct SdState SdState;

// Stationary law of last season's attack ratio (`r = 2`).
typedef struct SdStationary SdStationary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread; empty after a success.
// The pointer stays valid until the next call into this library on the same thread.
const char *sd_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *sd_version(void);

// Preset distribution number `preset` in 1..=4.
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
SdStatus sd_distribution_preset(uint32_t preset, SdDistribution **out);

// `delta ~ Beta(a, b)` mixed with an atom at `delta = 1` of weight `delta_atom`;
// given `delta`, `ln tau ~ Normal(mu0 + mu1 delta, sigma2)`.
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
SdStatus sd_distribution_new(double a,
                             double b,
                             double mu0,
                             double mu1,
                             double sigma2,
                             double delta_atom,
                             SdDistribution **out);

// # Safety
// `dist` must be null or a handle from this library not yet freed.
void sd_distribution_free(SdDistribution *dist);

// Joint density of the continuous part at `(delta, tau)`.
//
// # Safety
// `dist` must be a live handle and `out` writable.
SdStatus sd_distribution_density(const SdDistribution *dist, double delta, double tau, double *out);

// Writes `n` seeded draws into `deltas` and `taus`, each of length at least `n`.
//
// # Safety
// `dist` must be a live handle; `deltas` and `taus` must hold `n` doubles.
SdStatus sd_distribution_sample(const SdDistribution *dist,
                                uint64_t seed,
                                size_t n,
                                double *deltas,
                                double *taus);

// Immunity-free state with memory `r >= 2`.
//
// # Safety
// `out` must be writable.
SdStatus sd_state_naive(size_t r, SdState **out);

// State from group shares `p[0..r]` and immunity levels `iota[0..r]`.
//
// # Safety
// `p` and `iota` must point to `r` doubles; `out` must be writable.
SdStatus sd_state_new(size_t r, const double *p, const double *iota, SdState **out);

// # Safety
// `state` must be null or a live handle.
void sd_state_free(SdState *state);

// Memory `r` of a state, or 0 for a null handle.
//
// # Safety
// `state` must be null or a live handle.
size_t sd_state_r(const SdState *state);

// Copies the group shares into `buf` (length `len >= r`).
//
// # Safety
// `state` must be a live handle and `buf` must hold `len` doubles.
SdStatus sd_state_shares(const SdState *state, double *buf, size_t len);

// Resolves one season with drift `delta` and transmissibility `tau`. Writes the
// next state, the effective reproduction number and the overall attack ratio.
//
// # Safety
// `state` must be a live handle; output pointers must be writable.
SdStatus sd_step(const SdState *state,
                 double delta,
                 double tau,
                 SdState **next,
                 double *r_e,
                 double *z);

// Drift and transmissibility producing `(z, r_e)` from prior attack ratio `p`.
//
// # Safety
// Output pointers must be writable.
SdStatus sd_solve_delta_star(double p, double z, double r_e, double *delta, double *tau);

// # Safety
// `dist` must be a live handle and `out` writable.
SdStatus sd_r2_model_new(const SdDistribution *dist, SdR2Model **out);

// # Safety
// `model` must be null or a live handle.
void sd_r2_model_free(SdR2Model *model);

// Probability of no outbreak given last season's attack ratio `p`.
//
// # Safety
// `model` must be a live handle and `out` writable.
SdStatus sd_prob_no_outbreak(const SdR2Model *model, double p, double *out);

// Density of this season's attack ratio `p_next` given last season's `p`.
//
// # Safety
// `model` must be a live handle and `out` writable.
SdStatus sd_transition_density(const SdR2Model *model, double p, double p_next, double *out);

// `P(z <= c)` given last season's attack ratio `p`, the no-outbreak atom included.
//
// # Safety
// `model` must be a live handle and `out` writable.
SdStatus sd_transition_cdf(const SdR2Model *model, double p, double c, double *out);

// Joint density of `(z, r_e)` given prior `p`.
//
// # Safety
// `model` must be a live handle and `out` writable.
SdStatus sd_biv_density(const SdR2Model *model, double p, double z, double r_e, double *out);

// Density of `z` given `r_e > 1` and prior `p > 0`.
//
// # Safety
// `model` must be a live handle and `out` writable.
SdStatus sd_conditional_density_z(const SdR2Model *model,
                                  double p,
                                  double r_e,
                                  double z,
                                  double *out);

// Solves for the stationary law on `grid_n` cells.
//
// # Safety
// `model` must be a live handle and `out` writable.
SdStatus sd_stationary_solve(const SdR2Model *model, size_t grid_n, SdStationary **out);

// # Safety
// `law` must be null or a live handle.
void sd_stationary_free(SdStationary *law);

// Stationary probability of a season without outbreak, or NaN for a null handle.
//
// # Safety
// `law` must be null or a live handle.
double sd_stationary_atom(const SdStationary *law);

// Continuous stationary density at `x`.
//
// # Safety
// `law` must be null or a live handle.
double sd_stationary_density_at(const SdStationary *law, double x);

// Simulates `n_seasons` seasons with memory `r` from the immunity-free state.
//
// # Safety
// `dist` must be a live handle and `out` writable.
SdStatus sd_run_chain(const SdDistribution *dist,
                      size_t r,
                      uint64_t seed,
                      size_t n_seasons,
                      size_t burn_in,
                      SdChain **out);

// # Safety
// `chain` must be null or a live handle.
void sd_chain_free(SdChain *chain);

// Number of seasons in a chain, or 0 for a null handle.
//
// # Safety
// `chain` must be null or a live handle.
size_t sd_chain_len(const SdChain *chain);

// Copies per-season effective reproduction numbers and attack ratios (burn-in
// included) into buffers of length `len >= sd_chain_len(chain)`.
//
// # Safety
// `chain` must be a live handle; `r_e` and `z` must hold `len` doubles.
SdStatus sd_chain_outcomes(const SdChain *chain, double *r_e, double *z, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEASONAL_DRIFT_H */
