#ifndef QIUP_H
#define QIUP_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum QiupStatus {
  QIUP_STATUS_OK = 0,
  QIUP_STATUS_NULL_POINTER = 1,
  QIUP_STATUS_INVALID_UTF8 = 2,
  QIUP_STATUS_OUT_OF_RANGE = 3,
  QIUP_STATUS_INVALID_SCENARIO = 4,
  QIUP_STATUS_NUMERICAL = 5,
  QIUP_STATUS_IO = 6,
  QIUP_STATUS_BUFFER_TOO_SMALL = 7,
  QIUP_STATUS_PANIC = 8,
} QiupStatus;

/**
 * Output port of the second beam splitter.
 */
typedef enum QiupPort {
  QIUP_PORT_G = 0,
  QIUP_PORT_H = 1,
} QiupPort;

/**
 * Opaque pair of simulated frames (G and H).
 */
typedef struct QiupFrames QiupFrames;

/**
 * Opaque scenario handle.
 */
typedef struct QiupScenario QiupScenario;

/**
 * Result of a fringe fit, `A + B·cos(φ − φ0)`.
 */
typedef struct QiupFit {
  double offset;
  double amplitude;
  double phase;
  double visibility;
  double offset_se;
  double amplitude_se;
  double phase_se;
  double visibility_se;
  /**
   * Nonzero when the fitted visibility exceeds 1.
   */
  int32_t unphysical;
} QiupFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *qiup_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qiup_version(void);

/**
 * Creates a scenario from a preset name such as `"silicon_cat"`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out_handle` a valid pointer.
 */
enum QiupStatus qiup_scenario_from_preset(const char *name, struct QiupScenario **out_handle);

/**
 * Parses and validates a scenario JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out_handle` a valid pointer.
 */
enum QiupStatus qiup_scenario_from_json(const char *json, struct QiupScenario **out_handle);

/**
 * Writes the scenario as JSON into `buf` (NUL-terminated). `needed`
 * receives the required size including the terminator; pass a null `buf`
 * to query it.
 *
 * # Safety
 * `handle` must come from this library; `buf` must hold `cap` bytes.
 */
enum QiupStatus qiup_scenario_to_json(const struct QiupScenario *handle,
                                      char *buf,
                                      size_t cap,
                                      size_t *needed);

/**
 * Releases a scenario. Null is ignored.
 *
 * # Safety
 * `handle` must come from this library and not be used afterwards.
 */
void qiup_scenario_free(struct QiupScenario *handle);

/**
 * Camera grid size.
 *
 * # Safety
 * `handle` must come from this library; `rows` and `cols` must be valid.
 */
enum QiupStatus qiup_scenario_shape(const struct QiupScenario *handle, size_t *rows, size_t *cols);

/**
 * Effective visibility `v0 × mismatch envelope`.
 *
 * # Safety
 * `handle` must come from this library; `value` must be valid.
 */
enum QiupStatus qiup_scenario_effective_visibility(const struct QiupScenario *handle,
                                                   double *value);

/**
 * Sets the camera random seed.
 *
 * # Safety
 * `handle` must come from this library.
 */
enum QiupStatus qiup_scenario_set_seed(struct QiupScenario *handle, uint64_t seed);

/**
 * Nonzero selects exact expectations instead of random draws.
 *
 * # Safety
 * `handle` must come from this library.
 */
enum QiupStatus qiup_scenario_set_noiseless(struct QiupScenario *handle, int32_t noiseless);

/**
 * Nonzero blocks the idler between the crystals.
 *
 * # Safety
 * `handle` must come from this library.
 */
enum QiupStatus qiup_scenario_set_blocked(struct QiupScenario *handle, int32_t blocked);

/**
 * Pump phase in radians.
 *
 * # Safety
 * `handle` must come from this library.
 */
enum QiupStatus qiup_scenario_set_pump_phase(struct QiupScenario *handle, double radians);

/**
 * # Safety
 * `handle` must come from this library.
 */
enum QiupStatus qiup_scenario_set_setup_visibility(struct QiupScenario *handle, double v0);

/**
 * Arm-length mismatch in mm.
 *
 * # Safety
 * `handle` must come from this library.
 */
enum QiupStatus qiup_scenario_set_path_mismatch(struct QiupScenario *handle, double mm);

/**
 * # Safety
 * `handle` must come from this library.
 */
enum QiupStatus qiup_scenario_set_pump_power(struct QiupScenario *handle, double mw);

/**
 * # Safety
 * `handle` must come from this library.
 */
enum QiupStatus qiup_scenario_set_idler_efficiency(struct QiupScenario *handle, double eta);

/**
 * Peak photons per pixel per exposure at the reference pump power.
 *
 * # Safety
 * `handle` must come from this library.
 */
enum QiupStatus qiup_scenario_set_peak_photons(struct QiupScenario *handle, double photons);

/**
 * Simulates the G and H frames at the scenario's pump phase.
 *
 * # Safety
 * `handle` must come from this library; `out_frames` must be valid.
 */
enum QiupStatus qiup_simulate(const struct QiupScenario *handle, struct QiupFrames **out_frames);

/**
 * Copies one output frame into `buf` (row-major, `rows × cols` counts).
 *
 * # Safety
 * `frames` must come from [`qiup_simulate`]; `buf` must hold `len` values.
 */
enum QiupStatus qiup_frames_copy(const struct QiupFrames *frames,
                                 enum QiupPort port,
                                 uint32_t *buf,
                                 size_t len);

/**
 * Frame size.
 *
 * # Safety
 * `frames` must come from [`qiup_simulate`]; `rows` and `cols` must be valid.
 */
enum QiupStatus qiup_frames_shape(const struct QiupFrames *frames, size_t *rows, size_t *cols);

/**
 * Releases frames. Null is ignored.
 *
 * # Safety
 * `frames` must come from [`qiup_simulate`] and not be used afterwards.
 */
void qiup_frames_free(struct QiupFrames *frames);

/**
 * Mean counts at G and H for pump phase `phi`, written row-major into `g`
 * and `h`, each holding `len` values.
 *
 * # Safety
 * `handle` must come from this library; `g` and `h` must hold `len` values.
 */
enum QiupStatus qiup_expected_frames(const struct QiupScenario *handle,
                                     double phi,
                                     double *g,
                                     double *h,
                                     size_t len);

/**
 * Pump-phase scan over the default region of interest. `phis` and `counts`
 * receive `steps` values each.
 *
 * # Safety
 * `handle` must come from this library; both buffers must hold `steps` values.
 */
enum QiupStatus qiup_phase_scan(const struct QiupScenario *handle,
                                size_t steps,
                                double cycles,
                                double *phis,
                                double *counts);

/**
 * Output probabilities `½[1 ± v0·T·cos(γi − γs + φ)]`.
 *
 * # Safety
 * `p_g` and `p_h` must be valid pointers.
 */
enum QiupStatus qiup_closed_form(double transmittance,
                                 double gamma_idler,
                                 double gamma_signal,
                                 double pump_phase,
                                 double setup_visibility,
                                 double *p_g,
                                 double *p_h);

/**
 * Output probabilities from the full state with the idler traced out.
 *
 * # Safety
 * `p_g` and `p_h` must be valid pointers.
 */
enum QiupStatus qiup_detection_probabilities(double transmittance,
                                             double gamma,
                                             double pump_phase,
                                             int32_t blocked,
                                             double *p_g,
                                             double *p_h);

/**
 * Etch depth in nm that produces `phase` radians at `wavelength_nm` for a
 * built-in material (`"silica"`, `"silicon"`) or a JSON index-table file.
 *
 * # Safety
 * `material` must be a NUL-terminated string; `depth_nm` must be valid.
 */
enum QiupStatus qiup_design_etch(const char *material,
                                 double phase,
                                 double wavelength_nm,
                                 double *depth_nm);

/**
 * Least-squares fringe fit of `n` samples.
 *
 * # Safety
 * `phis` and `values` must hold `n` values; `result` must be valid.
 */
enum QiupStatus qiup_fit_fringe(const double *phis,
                                const double *values,
                                size_t n,
                                struct QiupFit *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QIUP_H */
