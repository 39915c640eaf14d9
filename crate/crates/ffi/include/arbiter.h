#ifndef ARBITER_H
#define ARBITER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ArbiterStatus {
  ARBITER_STATUS_OK = 0,
  ARBITER_STATUS_NULL_POINTER = 1,
  ARBITER_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The session has already reached a terminal outcome.
   */
  ARBITER_STATUS_TERMINATED = 3,
  ARBITER_STATUS_EMPTY_SAMPLE = 4,
  ARBITER_STATUS_CONFIG = 5,
  ARBITER_STATUS_INTERNAL = 6,
} ArbiterStatus;

typedef enum ArbiterPolicy {
  ARBITER_POLICY_POSITIVE = 0,
  ARBITER_POLICY_NEGATIVE = 1,
  ARBITER_POLICY_BELL = 2,
} ArbiterPolicy;

typedef enum ArbiterOutcome {
  ARBITER_OUTCOME_RUNNING = 0,
  ARBITER_OUTCOME_SUCCESS = 1,
  ARBITER_OUTCOME_STUCK_AT_NOMINAL = 2,
  ARBITER_OUTCOME_TIMEOUT = 3,
} ArbiterOutcome;

/**
 * Opaque live episode.
 */
typedef struct ArbiterSession ArbiterSession;

/**
 * Confidence-model parameters: range `D` (m), intent floor `a_min` and
 * autonomy level `gamma`.
 */
typedef struct ArbiterConfidence {
  double range_d;
  double a_min;
  double gamma;
} ArbiterConfidence;

typedef struct ArbiterVec3 {
  double x;
  double y;
  double z;
} ArbiterVec3;

/**
 * Mann-Whitney U test result. `significance`: 0 none, 1 moderate, 2 high.
 */
typedef struct ArbiterUTest {
  double u;
  double p;
  /**
   * 1 when the exact permutation distribution was used.
   */
  int32_t exact;
  int32_t significance;
} ArbiterUTest;

/**
 * One executed session step.
 */
typedef struct ArbiterStep {
  uint32_t step;
  /**
   * Pose after the step.
   */
  struct ArbiterVec3 pos;
  struct ArbiterVec3 command;
  struct ArbiterVec3 robot;
  double alpha;
  double conf_in;
  double conf_au;
  double helpfulness;
  double friendliness;
  /**
   * An [`ArbiterOutcome`] value.
   */
  int32_t outcome;
} ArbiterStep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the next
 * failing call on the same thread.
 */
const char *arbiter_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *arbiter_version(void);

/**
 * Intent confidence at distance `d` with intent spread `sigma_n`.
 *
 * # Safety
 * `out` must be null or point to a writable `double`.
 */
enum ArbiterStatus arbiter_conf_in(double d,
                                   double sigma_n,
                                   struct ArbiterConfidence params,
                                   double *out);

/**
 * Autonomy confidence at distance `d` with autonomy spread `sigma_a`.
 *
 * # Safety
 * `out` must be null or point to a writable `double`.
 */
enum ArbiterStatus arbiter_conf_au(double d,
                                   double sigma_a,
                                   struct ArbiterConfidence params,
                                   double *out);

/**
 * Robot authority of `policy` (an [`ArbiterPolicy`] value) at distance `d`,
 * with the default baseline ramps.
 *
 * # Safety
 * `out` must be null or point to a writable `double`.
 */
enum ArbiterStatus arbiter_alpha(int32_t policy,
                                 double d,
                                 double sigma_n,
                                 double sigma_a,
                                 struct ArbiterConfidence params,
                                 double *out);

/**
 * Probability that an isotropic 3-D Gaussian endpoint with spread `sigma_a`
 * lands within `r` of its mean.
 *
 * # Safety
 * `out` must be null or point to a writable `double`.
 */
enum ArbiterStatus arbiter_encounter_prob(double r, double sigma_a, double *out);

/**
 * Blended command `(1 - alpha)·x + alpha·y`.
 *
 * # Safety
 * `out` must be null or point to a writable `ArbiterVec3`.
 */
enum ArbiterStatus arbiter_blend(struct ArbiterVec3 x,
                                 struct ArbiterVec3 y,
                                 double alpha,
                                 struct ArbiterVec3 *out);

/**
 * Two-sided Mann-Whitney U test of `a` against `b`.
 *
 * # Safety
 * `a` and `b` must point to `na` and `nb` readable doubles (they may be null
 * only when the length is 0); `out` must be null or writable.
 */
enum ArbiterStatus arbiter_mann_whitney(const double *a,
                                        size_t na,
                                        const double *b,
                                        size_t nb,
                                        double high,
                                        double moderate,
                                        struct ArbiterUTest *out);

/**
 * Start a live episode at the scene's home pose.
 *
 * `config_toml` is configuration text, or NULL for the defaults. `policy` is
 * an [`ArbiterPolicy`] value; levels run 0..=5.
 *
 * # Safety
 * `config_toml` must be null or a NUL-terminated string; `out` must be null
 * or point to writable storage for a pointer.
 */
enum ArbiterStatus arbiter_session_new(const char *config_toml,
                                       int32_t policy,
                                       uint8_t intent_level,
                                       uint8_t autonomy_level,
                                       size_t target_id,
                                       uint64_t seed,
                                       struct ArbiterSession **out);

/**
 * Apply one human input (clamped to twice the operator speed) and advance.
 *
 * # Safety
 * `session` must come from [`arbiter_session_new`] and not be freed; `out`
 * must be null or writable.
 */
enum ArbiterStatus arbiter_session_step(struct ArbiterSession *session,
                                        struct ArbiterVec3 input,
                                        struct ArbiterStep *out);

/**
 * Number of accepted steps, or 0 for a null handle.
 *
 * # Safety
 * `session` must be null or a live handle.
 */
uint32_t arbiter_session_steps(const struct ArbiterSession *session);

/**
 * Release a session. Null is ignored.
 *
 * # Safety
 * `session` must be null or a handle from [`arbiter_session_new`] that has
 * not been freed.
 */
void arbiter_session_free(struct ArbiterSession *session);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ARBITER_H */
