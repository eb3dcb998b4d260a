#ifndef WPPAN_H
#define WPPAN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Simulation strategy.
typedef enum WppanMode {
  WPPAN_MODE_SEARCH = 0,
  WPPAN_MODE_GREEDY = 1,
  WPPAN_MODE_NAIVE = 2,
  WPPAN_MODE_MISO = 3,
} WppanMode;

// Result code of every fallible call.
typedef enum WppanStatus {
  WPPAN_STATUS_OK = 0,
  WPPAN_STATUS_NULL_POINTER = 1,
  WPPAN_STATUS_INVALID_CONFIG = 2,
  WPPAN_STATUS_INVALID_ARGUMENT = 3,
  WPPAN_STATUS_SOLVER_FAILURE = 4,
  WPPAN_STATUS_IO = 5,
  WPPAN_STATUS_PANIC = 6,
} WppanStatus;

// Opaque system configuration.
typedef struct WppanConfig WppanConfig;

// Opaque outcome of one simulated trial.
typedef struct WppanTrialResult WppanTrialResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next call into this library on the same thread.
const char *wppan_last_error(void);

// Library version as a static NUL-terminated string.
const char *wppan_version(void);

// Configuration with the reference scenario defaults. Never null.
struct WppanConfig *wppan_config_new_default(void);

// Parse and validate a JSON configuration. Fields left out keep their
// defaults.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum WppanStatus wppan_config_from_json(const char *json, struct WppanConfig **out);

// Serialize a configuration to JSON. Release the string with
// [`wppan_string_free`].
//
// # Safety
// `cfg` must come from this library; `out` must be a valid pointer.
enum WppanStatus wppan_config_to_json(const struct WppanConfig *cfg, char **out);

// # Safety
// `s` must be null or a string returned by this library.
void wppan_string_free(char *s);

// # Safety
// `cfg` must be null or a handle from this library, not yet freed.
void wppan_config_free(struct WppanConfig *cfg);

// # Safety
// `cfg` must be a live handle from this library.
enum WppanStatus wppan_config_set_num_users(struct WppanConfig *cfg, size_t users);

// # Safety
// `cfg` must be a live handle from this library.
enum WppanStatus wppan_config_set_num_antennas(struct WppanConfig *cfg, size_t antennas);

// # Safety
// `cfg` must be a live handle from this library.
enum WppanStatus wppan_config_set_p0_dbm(struct WppanConfig *cfg, double dbm);

// Waveguide attenuation in dB/m.
//
// # Safety
// `cfg` must be a live handle from this library.
enum WppanStatus wppan_config_set_waveguide_loss(struct WppanConfig *cfg, double db_per_m);

// # Safety
// `cfg` must be a live handle from this library.
enum WppanStatus wppan_config_set_rician_k(struct WppanConfig *cfg, double k);

// # Safety
// `cfg` must be a live handle from this library.
enum WppanStatus wppan_config_set_seed(struct WppanConfig *cfg, uint64_t seed);

// Simulate trial `trial` with `mode`, one of the `WppanMode` values. A trial whose solver did not converge
// still yields a result, flagged by [`wppan_trial_failed`].
//
// # Safety
// `cfg` must be a live handle; `out` must be a valid pointer.
enum WppanStatus wppan_run_trial(const struct WppanConfig *cfg,
                                 uint64_t trial,
                                 uint32_t mode,
                                 struct WppanTrialResult **out);

// # Safety
// `result` must be null or a handle from this library, not yet freed.
void wppan_trial_free(struct WppanTrialResult *result);

// Minimum user rate in bit/s/Hz, or NaN for a null handle.
//
// # Safety
// `result` must be null or a live handle.
double wppan_trial_min_rate(const struct WppanTrialResult *result);

// True when the solver stopped before converging; null handles count as
// failed.
//
// # Safety
// `result` must be null or a live handle.
bool wppan_trial_failed(const struct WppanTrialResult *result);

// Number of users, or 0 for a null handle.
//
// # Safety
// `result` must be null or a live handle.
size_t wppan_trial_num_users(const struct WppanTrialResult *result);

// Number of downlink slots with nonzero duration, or 0 for a null handle.
//
// # Safety
// `result` must be null or a live handle.
size_t wppan_trial_num_downlink_slots(const struct WppanTrialResult *result);

// Copy the per-user rates into `out`, which holds `len` values.
//
// # Safety
// `result` must be a live handle; `out` must hold `len` doubles.
enum WppanStatus wppan_trial_rates(const struct WppanTrialResult *result, double *out, size_t len);

// Active-antenna counts and durations of the used downlink slots.
//
// # Safety
// `result` must be a live handle; both buffers must hold `len` values.
enum WppanStatus wppan_trial_downlink(const struct WppanTrialResult *result,
                                      size_t *counts,
                                      double *durations,
                                      size_t len);

// Active-antenna counts and durations of the used uplink slots.
//
// # Safety
// `result` must be a live handle; both buffers must hold `len` values.
enum WppanStatus wppan_trial_uplink(const struct WppanTrialResult *result,
                                    size_t *counts,
                                    double *durations,
                                    size_t len);

// Number of used uplink slots, or 0 for a null handle.
//
// # Safety
// `result` must be null or a live handle.
size_t wppan_trial_num_uplink_slots(const struct WppanTrialResult *result);

// Solve the max-min timeslot allocation for a given harvest matrix.
//
// `harvest` is row-major `users x slots` (harvested power in W),
// `uplink_gains` holds `users` composite uplink gains. On success the
// durations are written to `tau_d` (`slots` values) and `tau_u` (`users`
// values) and the achieved min-rate to `min_rate`. On non-convergence the
// best schedule found is still written and `WPPAN_STATUS_SOLVER_FAILURE` is
// returned.
//
// # Safety
// All pointers must be valid for the stated number of values.
enum WppanStatus wppan_solve_allocation(const double *harvest,
                                        size_t users,
                                        size_t slots,
                                        const double *uplink_gains,
                                        double frame,
                                        double *tau_d,
                                        double *tau_u,
                                        double *min_rate);

// Output of the sigmoid harvester for input power `p_in` (W).
//
// # Safety
// `out` must be a valid pointer.
enum WppanStatus wppan_harvested_power(double p_in, double p_max, double a, double b, double *out);

// Harvester parameters of the default configuration.
//
// # Safety
// All pointers must be valid.
enum WppanStatus wppan_default_harvester(double *p_max, double *a, double *b);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WPPAN_H */
