#ifndef ROESSER_H
#define ROESSER_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call. The first four values match the command-line exit codes.
 */
typedef enum RoesserStatus {
  ROESSER_STATUS_OK = 0,
  /**
   * Infeasible problem, failed check or dwell-time violation.
   */
  ROESSER_STATUS_VERIFICATION = 1,
  /**
   * Malformed input or argument.
   */
  ROESSER_STATUS_INPUT = 2,
  /**
   * Singular block, blowup or solver breakdown.
   */
  ROESSER_STATUS_NUMERICAL = 3,
  ROESSER_STATUS_NULL_POINTER = 4,
  /**
   * Output buffer too small.
   */
  ROESSER_STATUS_BUFFER_TOO_SMALL = 5,
  ROESSER_STATUS_PANIC = 6,
} RoesserStatus;

/**
 * A validated plant.
 */
typedef struct RoesserModel RoesserModel;

/**
 * Barred synthesis variables with recovered gains.
 */
typedef struct RoesserSolution RoesserSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Owned by the library.
 */
const char *roesser_last_error_message(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void roesser_string_free(char *s);

/**
 * Parse and validate a model from JSON.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` a valid pointer.
 */
enum RoesserStatus roesser_model_from_json(const char *json, struct RoesserModel **out);

/**
 * The bundled two-mode example.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RoesserStatus roesser_model_paper_example(struct RoesserModel **out);

/**
 * # Safety
 * `m` must come from this library (or be NULL) and not be used afterwards.
 */
void roesser_model_free(struct RoesserModel *m);

/**
 * Number of modes, 0 for NULL.
 *
 * # Safety
 * `m` must be a model handle or NULL.
 */
uintptr_t roesser_model_n_modes(const struct RoesserModel *m);

/**
 * Parse a solution from JSON.
 *
 * # Safety
 * `json` nul-terminated; `out` valid.
 */
enum RoesserStatus roesser_solution_from_json(const char *json, struct RoesserSolution **out);

/**
 * Serialize a solution; free the result with `roesser_string_free`.
 *
 * # Safety
 * `s` a solution handle; `out` valid.
 */
enum RoesserStatus roesser_solution_to_json(const struct RoesserSolution *s, char **out);

/**
 * # Safety
 * `s` must come from this library (or be NULL) and not be used afterwards.
 */
void roesser_solution_free(struct RoesserSolution *s);

/**
 * Solve the synthesis inequalities at fixed α, δ, ε (same δ, ε for all modes).
 * `best_t` (may be NULL) receives the smallest worst eigenvalue reached; on
 * infeasibility the status is `Verification` and `*out` is left untouched.
 *
 * # Safety
 * `model` a model handle; `out` valid; `best_t` valid or NULL.
 */
enum RoesserStatus roesser_synthesize(const struct RoesserModel *model,
                                      double alpha,
                                      double delta,
                                      double epsilon,
                                      struct RoesserSolution **out,
                                      double *best_t);

/**
 * Check the synthesis inequalities at `margin` (≤ 0 selects the default 1e-7).
 *
 * # Safety
 * Handles valid; `pass`, `worst_slack` valid or NULL.
 */
enum RoesserStatus roesser_verify(const struct RoesserModel *model,
                                  const struct RoesserSolution *solution,
                                  double margin,
                                  bool *pass,
                                  double *worst_slack);

/**
 * Consolidated certificate; `report_json` (may be NULL) receives the full report.
 *
 * # Safety
 * Handles valid; `pass`, `report_json` valid or NULL.
 */
enum RoesserStatus roesser_certify(const struct RoesserModel *model,
                                   const struct RoesserSolution *solution,
                                   bool *pass,
                                   char **report_json);

/**
 * Copy K of `mode` (0-based) row-major into `buf`; `rows`, `cols` receive its shape.
 *
 * # Safety
 * `solution` valid; `buf` holds `len` doubles (may be NULL when `len` is 0).
 */
enum RoesserStatus roesser_solution_gain(const struct RoesserSolution *solution,
                                         uintptr_t mode,
                                         double *buf,
                                         uintptr_t len,
                                         uintptr_t *rows,
                                         uintptr_t *cols);

/**
 * Switching constant μ and minimal average dwell time τ_a* at `alpha`.
 *
 * # Safety
 * `solution` valid; `mu`, `tau_star` valid pointers.
 */
enum RoesserStatus roesser_mu_tau(const struct RoesserSolution *solution,
                                  double alpha,
                                  double *mu,
                                  double *tau_star);

/**
 * Simulate on an (imax+1)×(jmax+1) grid with round-robin switching of average dwell
 * time `tau_a` and write the per-diagonal energies to `buf` (imax + jmax + 1 values).
 * A NULL `solution` simulates the open loop.
 *
 * # Safety
 * `model` valid; `solution` valid or NULL; `buf` holds `len` doubles; `written` valid or NULL.
 */
enum RoesserStatus roesser_simulate_energy(const struct RoesserModel *model,
                                           const struct RoesserSolution *solution,
                                           double tau_a,
                                           double n0,
                                           int64_t imax,
                                           int64_t jmax,
                                           double *buf,
                                           uintptr_t len,
                                           uintptr_t *written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROESSER_H */
