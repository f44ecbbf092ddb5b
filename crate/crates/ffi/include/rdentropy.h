#ifndef RDENTROPY_H
#define RDENTROPY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum RdStatus {
  RD_STATUS_OK = 0,
  RD_STATUS_NULL_POINTER = 1,
  RD_STATUS_INVALID_ARGUMENT = 2,
  RD_STATUS_CONFIG = 3,
  RD_STATUS_NUMERICAL = 4,
  RD_STATUS_IO = 5,
  RD_STATUS_PARSE = 6,
  RD_STATUS_UTF8 = 7,
  RD_STATUS_BUFFER_TOO_SMALL = 8,
  RD_STATUS_PANIC = 9,
} RdStatus;

/**
 * Opaque simulation handle.
 */
typedef struct RdSimulation RdSimulation;

/**
 * Homogeneous equilibrium for the conserved masses.
 */
typedef struct RdEquilibrium {
  double a_inf;
  double b_inf;
  double c_inf;
} RdEquilibrium;

/**
 * Scalar functionals at the current simulation time.
 */
typedef struct RdSample {
  double t;
  double entropy;
  double rel_entropy;
  double dissipation;
  double m1;
  double m2;
  double ckp_lhs;
  double abc_defect;
} RdSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message on this thread into `buf` as a
 * NUL-terminated string. `*needed` receives the required size including
 * the terminator.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null with `len == 0`; `needed`
 * may be null.
 */
enum RdStatus rd_last_error(char *buf, size_t len, size_t *needed);

/**
 * Computes the equilibrium `(a_inf, b_inf, c_inf)` for masses `(m1, m2)`.
 *
 * # Safety
 * `out` must be a valid pointer or null.
 */
enum RdStatus rd_equilibrium(double m1, double m2, struct RdEquilibrium *out);

/**
 * `Gamma(x, y) = y phi(x / y) / (sqrt x - sqrt y)^2`.
 *
 * # Safety
 * `out` must be a valid pointer or null.
 */
enum RdStatus rd_gamma_ratio(double x, double y, double *out);

/**
 * Builds a simulation from configuration text in the `key=value` format
 * used by the command-line `run` command.
 *
 * # Safety
 * `config` must be a NUL-terminated string or null; `out` must be valid
 * or null.
 */
enum RdStatus rd_simulation_new(const char *config, struct RdSimulation **out);

/**
 * Releases a simulation. Null is ignored.
 *
 * # Safety
 * `sim` must come from [`rd_simulation_new`] and not be used afterwards.
 */
void rd_simulation_free(struct RdSimulation *sim);

/**
 * Advances `n` Strang steps. On failure the state is left at the last
 * successful step.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum RdStatus rd_simulation_step(struct RdSimulation *sim, uint64_t n);

/**
 * Current simulation time.
 *
 * # Safety
 * `sim` must be a live handle; `t` valid or null.
 */
enum RdStatus rd_simulation_time(const struct RdSimulation *sim, double *t);

/**
 * Number of grid cells (length of each field).
 *
 * # Safety
 * `sim` must be a live handle; `n` valid or null.
 */
enum RdStatus rd_simulation_cells(const struct RdSimulation *sim, size_t *n);

/**
 * Equilibrium that the simulation relaxes towards.
 *
 * # Safety
 * `sim` must be a live handle; `out` valid or null.
 */
enum RdStatus rd_simulation_equilibrium(const struct RdSimulation *sim, struct RdEquilibrium *out);

/**
 * Evaluates the functionals at the current state.
 *
 * # Safety
 * `sim` must be a live handle; `out` valid or null.
 */
enum RdStatus rd_simulation_sample(struct RdSimulation *sim, struct RdSample *out);

/**
 * Copies the fields into caller buffers of `len` cells each. Any of
 * `a`, `b`, `c` may be null to skip that species.
 *
 * # Safety
 * `sim` must be a live handle; non-null buffers must hold `len` doubles.
 */
enum RdStatus rd_simulation_fields(const struct RdSimulation *sim,
                                   double *a,
                                   double *b,
                                   double *c,
                                   size_t len);

/**
 * Echo of the configuration in file format. Same buffer protocol as
 * [`rd_last_error`].
 *
 * # Safety
 * `sim` must be a live handle; `buf` valid for `len` bytes or null.
 */
enum RdStatus rd_simulation_config(const struct RdSimulation *sim,
                                   char *buf,
                                   size_t len,
                                   size_t *needed);

/**
 * Analyzes a time-series CSV (writing `report.txt` and `summary.txt`
 * beside it). `mode` is `"full"`, `"db0"` or `"dc0"`; `*all_pass` is set
 * to 1 when every check passes and 0 otherwise.
 *
 * # Safety
 * `path` and `mode` must be NUL-terminated strings; `all_pass` valid or
 * null.
 */
enum RdStatus rd_analyze_csv(const char *path,
                             const char *mode,
                             size_t dimension,
                             int32_t *all_pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RDENTROPY_H */
