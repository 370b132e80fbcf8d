#ifndef HOPF_DELAY_H
#define HOPF_DELAY_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes shared by all functions.
 */
typedef enum HdStatus {
  HD_STATUS_OK = 0,
  HD_STATUS_NULL_POINTER = 1,
  /*
   Bad configuration or arguments outside an operation's domain.
   */
  HD_STATUS_INVALID_INPUT = 2,
  /*
   Divergence, failed convergence or failed quadrature.
   */
  HD_STATUS_NUMERICAL = 3,
  HD_STATUS_OUT_OF_BOUNDS = 4,
  HD_STATUS_INVALID_UTF8 = 5,
  /*
   A Rust panic was caught at the boundary.
   */
  HD_STATUS_PANIC = 6,
} HdStatus;

/*
 Parsed experiment configuration.
 */
typedef struct HdConfig HdConfig;

/*
 Simulation output: one snapshot of `A` per recorded `mu`.
 */
typedef struct HdTrajectory HdTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message, NUL-terminated and truncated to `len` bytes.
 Returns the full message length excluding the terminator.

 # Safety
 `buf` must be null or point to `len` writable bytes.
 */
size_t hd_last_error_message(char *buf, size_t len);

/*
 Library version as a static NUL-terminated string.
 */
const char *hd_version(void);

/*
 Parses a TOML experiment.

 # Safety
 `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum HdStatus hd_config_from_toml(const char *toml, struct HdConfig **out);

/*
 Loads a built-in experiment such as `"fig3"`.

 # Safety
 `name` must be a NUL-terminated string; `out` must be writable.
 */
enum HdStatus hd_config_from_preset(const char *name, struct HdConfig **out);

/*
 # Safety
 `cfg` must be null or a handle from `hd_config_from_*` not yet freed.
 */
void hd_config_free(struct HdConfig *cfg);

/*
 Number of grid points of the configured domain.

 # Safety
 Handles must be valid; `out` writable.
 */
enum HdStatus hd_config_n_points(const struct HdConfig *cfg, size_t *out);

/*
 Runs the simulation described by `cfg`.

 # Safety
 Handles must be valid; `out` writable.
 */
enum HdStatus hd_simulate(const struct HdConfig *cfg, struct HdTrajectory **out);

/*
 # Safety
 `traj` must be null or a handle from `hd_simulate` not yet freed.
 */
void hd_trajectory_free(struct HdTrajectory *traj);

/*
 # Safety
 Handles must be valid; `out` writable.
 */
enum HdStatus hd_trajectory_n_snapshots(const struct HdTrajectory *traj, size_t *out);

/*
 # Safety
 Handles must be valid; `out` writable.
 */
enum HdStatus hd_trajectory_n_points(const struct HdTrajectory *traj, size_t *out);

/*
 Copies snapshot `k`: its `mu` and the real and imaginary parts of `A`.

 # Safety
 `re` and `im` must each hold `len` doubles, `len` equal to the point count.
 */
enum HdStatus hd_trajectory_snapshot(const struct HdTrajectory *traj,
                                     size_t k,
                                     double *mu,
                                     double *re,
                                     double *im,
                                     size_t len);

/*
 Measured exit `mu` per grid point (`+inf` where the solution never left the QSS).

 # Safety
 `out` must hold `len` doubles, `len` equal to the point count.
 */
enum HdStatus hd_exit_times(const struct HdTrajectory *traj,
                            const struct HdConfig *cfg,
                            double threshold,
                            double *out,
                            size_t len);

/*
 Space-time buffer curve at `x` (`+inf` on nodal lines of the source).

 # Safety
 Handles must be valid; `out` writable.
 */
enum HdStatus hd_mu_stbc(const struct HdConfig *cfg, double x, double *out);

/*
 Homogeneous exit time at `x` (`+inf` when the homogeneous part never reaches 1).

 # Safety
 Handles must be valid; `out` writable.
 */
enum HdStatus hd_mu_h(const struct HdConfig *cfg, double x, double *out);

/*
 Instantaneous Hopf curve at `x` in the configured regime.

 # Safety
 Handles must be valid; `out` writable.
 */
enum HdStatus hd_mu_hopf(const struct HdConfig *cfg, double x, double *out);

/*
 Case 1 to 4 from the predicted curves on the configured grid.

 # Safety
 Handles must be valid; `out` writable.
 */
enum HdStatus hd_classify(const struct HdConfig *cfg, uint8_t *out);

/*
 Complex error function on the strip `|Im z| <= 30`.

 # Safety
 `out_re` and `out_im` must be writable.
 */
enum HdStatus hd_cerf(double re, double im, double *out_re, double *out_im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOPF_DELAY_H */
