#ifndef OPTRISK_H
#define OPTRISK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Vanilla call, for the `kind` arguments.
 */
#define OPTRISK_CALL 0

/**
 * Vanilla put, for the `kind` arguments.
 */
#define OPTRISK_PUT 1

typedef enum OptriskStatus {
  OPTRISK_STATUS_OK = 0,
  OPTRISK_STATUS_NULL_POINTER = 1,
  OPTRISK_STATUS_INVALID_PARAMETER = 2,
  OPTRISK_STATUS_INVALID_CONTRACT = 3,
  OPTRISK_STATUS_OUT_OF_DOMAIN = 4,
  OPTRISK_STATUS_BOUNDARY_MISMATCH = 5,
  OPTRISK_STATUS_DEGENERATE_MEAN = 6,
  OPTRISK_STATUS_NEGATIVE_PRICE = 7,
  OPTRISK_STATUS_OUT_OF_BRACKET = 8,
  OPTRISK_STATUS_MOMENT_OVERFLOW = 9,
  OPTRISK_STATUS_NUMERICAL_INCONSISTENCY = 10,
  OPTRISK_STATUS_NEWTON_DIVERGENCE = 11,
  OPTRISK_STATUS_UNSTABLE_SOLUTION = 12,
  /**
   * A Rust panic was caught at the boundary.
   */
  OPTRISK_STATUS_INTERNAL = 13,
} OptriskStatus;

/**
 * Solved American put together with the contract it was solved for.
 */
typedef struct OptriskAmericanGrid OptriskAmericanGrid;

typedef struct OptriskMarket {
  double r;
  double sigma;
  double s0;
} OptriskMarket;

typedef struct OptriskMomentSet {
  double mean;
  double second_moment;
  double variance;
  double sd;
  /**
   * Probability of expiring worthless.
   */
  double pew;
} OptriskMomentSet;

typedef struct OptriskMcEstimate {
  double mean;
  double variance;
  double pew;
  double stderr_mean;
  double stderr_variance;
  size_t n_paths;
} OptriskMcEstimate;

/**
 * Grid settings of the American solver. A non-positive `y_max` selects the
 * default truncation.
 */
typedef struct OptriskSolverConfig {
  size_t n_y;
  size_t n_tau;
  double y_max;
  double newton_tol;
  size_t newton_max_iter;
  size_t rannacher_steps;
} OptriskSolverConfig;

typedef struct OptriskAmericanProfile {
  double price;
  double second_moment;
  double variance;
  double pew;
  double early_exercise_price;
} OptriskAmericanProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next `optrisk_*` call on the same thread.
 */
const char *optrisk_last_error_message(void);

/**
 * Static name of a status code.
 */
const char *optrisk_status_name(enum OptriskStatus status);

/**
 * Library version as a static string.
 */
const char *optrisk_version(void);

/**
 * Mean, second moment, variance and PEW of a vanilla European option.
 *
 * # Safety
 * `market` and `out` must be valid pointers (or null, which is reported).
 */
enum OptriskStatus optrisk_european_profile(const struct OptriskMarket *market,
                                            uint32_t kind,
                                            double strike,
                                            double expiry,
                                            struct OptriskMomentSet *out);

/**
 * Raw moment `E[(discounted payoff)^n]` of a vanilla European option.
 *
 * # Safety
 * `market` and `out` must be valid pointers (or null, which is reported).
 */
enum OptriskStatus optrisk_european_moment(const struct OptriskMarket *market,
                                           uint32_t kind,
                                           double strike,
                                           double expiry,
                                           uint32_t n,
                                           double *out);

/**
 * Profile of a continuously monitored down-and-out put.
 *
 * # Safety
 * `market` and `out` must be valid pointers (or null, which is reported).
 */
enum OptriskStatus optrisk_dao_put_profile(const struct OptriskMarket *market,
                                           double strike,
                                           double expiry,
                                           double barrier,
                                           struct OptriskMomentSet *out);

/**
 * Risk-adjusted price `mean - q sd`; fails when it is not positive.
 *
 * # Safety
 * `profile` and `out` must be valid pointers (or null, which is reported).
 */
enum OptriskStatus optrisk_adjusted_price(const struct OptriskMomentSet *profile,
                                          double q,
                                          double *out);

/**
 * Black-Scholes volatility that reproduces `target_price`.
 *
 * # Safety
 * `market` and `out` must be valid pointers (or null, which is reported).
 */
enum OptriskStatus optrisk_effective_volatility(const struct OptriskMarket *market,
                                                uint32_t kind,
                                                double strike,
                                                double expiry,
                                                double target_price,
                                                double *out);

/**
 * Discretely monitored down-and-out put by simulation. With
 * `continuity_correction` set, the monitored barrier is shifted to emulate
 * continuous monitoring.
 *
 * # Safety
 * `market` and `out` must be valid pointers (or null, which is reported).
 */
enum OptriskStatus optrisk_mc_dao_put(const struct OptriskMarket *market,
                                      double strike,
                                      double expiry,
                                      double barrier,
                                      size_t n_paths,
                                      size_t n_steps,
                                      uint64_t seed,
                                      bool continuity_correction,
                                      struct OptriskMcEstimate *out);

/**
 * The default solver grid (400 x 400).
 */
struct OptriskSolverConfig optrisk_solver_config_default(void);

/**
 * Solves the American put. `config` may be null for the default grid. On
 * success `*out` owns a new handle.
 *
 * # Safety
 * `market` and `out` must be valid pointers; `config` must be valid or null.
 */
enum OptriskStatus optrisk_american_solve(const struct OptriskMarket *market,
                                          double strike,
                                          double expiry,
                                          const struct OptriskSolverConfig *config,
                                          struct OptriskAmericanGrid **out);

/**
 * Profile at spot `s` and calendar time `t` in `[0, T]`.
 *
 * # Safety
 * `grid` must come from [`optrisk_american_solve`] and not be freed; `out`
 * must be valid.
 */
enum OptriskStatus optrisk_american_evaluate(const struct OptriskAmericanGrid *grid,
                                             double s,
                                             double t,
                                             struct OptriskAmericanProfile *out);

/**
 * Number of points on the early exercise curve (0 for a null handle).
 *
 * # Safety
 * `grid` must come from [`optrisk_american_solve`] or be null.
 */
size_t optrisk_american_boundary_len(const struct OptriskAmericanGrid *grid);

/**
 * Copies the early exercise curve `(t, b(t))`, increasing in `t`, into two
 * caller-owned arrays of length `len`, which must equal
 * [`optrisk_american_boundary_len`].
 *
 * # Safety
 * `t_out` and `b_out` must each point to `len` writable doubles.
 */
enum OptriskStatus optrisk_american_boundary(const struct OptriskAmericanGrid *grid,
                                             double *t_out,
                                             double *b_out,
                                             size_t len);

/**
 * Releases a grid handle. Null is ignored.
 *
 * # Safety
 * `grid` must come from [`optrisk_american_solve`] and not be used again.
 */
void optrisk_american_free(struct OptriskAmericanGrid *grid);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPTRISK_H */
