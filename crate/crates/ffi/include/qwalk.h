#ifndef QWALK_H
#define QWALK_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * `(|0>|R> + i|0>|L>) / sqrt(2)`.
 */
#define QWALK_INIT_SYMMETRIC 0

/**
 * `|0>|R>`.
 */
#define QWALK_INIT_RIGHT 1

/**
 * Result code of every fallible call.
 */
typedef enum QwalkStatus {
  QWALK_STATUS_OK = 0,
  QWALK_STATUS_NULL_POINTER = 1,
  QWALK_STATUS_INVALID_ARGUMENT = 2,
  QWALK_STATUS_NOT_NORMALIZED = 3,
  QWALK_STATUS_CAPACITY_EXCEEDED = 4,
  QWALK_STATUS_BUFFER_TOO_SMALL = 5,
  QWALK_STATUS_PANIC = 6,
} QwalkStatus;

/**
 * Measured-coin channel plus the random stream of one trajectory.
 */
typedef struct QwalkDecoherence QwalkDecoherence;

/**
 * Noise level plus the random stream of one trajectory.
 */
typedef struct QwalkNoise QwalkNoise;

/**
 * Walker amplitudes on `-t_max..=t_max`.
 */
typedef struct QwalkState QwalkState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *qwalk_last_error(void);

/**
 * New state at `t = 0` from one of the `QWALK_INIT_*` constants.
 */
enum QwalkStatus qwalk_state_new(uint32_t init, size_t t_max, struct QwalkState **out);

/**
 * New state with chirality amplitudes `(r_re + i r_im, l_re + i l_im)` at the origin.
 */
enum QwalkStatus qwalk_state_new_custom(double r_re,
                                        double r_im,
                                        double l_re,
                                        double l_im,
                                        size_t t_max,
                                        struct QwalkState **out);

/**
 * Releases a state. Null is ignored.
 *
 * # Safety
 * `state` must come from `qwalk_state_new*` and not be freed twice.
 */
void qwalk_state_free(struct QwalkState *state);

/**
 * One step with the plain Hadamard coin.
 *
 * # Safety
 * `state` must be a live handle or null.
 */
enum QwalkStatus qwalk_state_step(struct QwalkState *state);

/**
 * One step with a freshly drawn noisy coin.
 *
 * # Safety
 * `state` and `noise` must be live handles or null.
 */
enum QwalkStatus qwalk_state_step_noisy(struct QwalkState *state, struct QwalkNoise *noise);

/**
 * One Hadamard step followed by a possible chirality measurement.
 *
 * # Safety
 * `state` and `channel` must be live handles or null.
 */
enum QwalkStatus qwalk_state_step_decoherent(struct QwalkState *state,
                                             struct QwalkDecoherence *channel);

/**
 * Current time step, or 0 for a null handle.
 *
 * # Safety
 * `state` must be a live handle or null.
 */
size_t qwalk_state_time(const struct QwalkState *state);

/**
 * Number of lattice sites, `2 t_max + 1`, or 0 for a null handle.
 *
 * # Safety
 * `state` must be a live handle or null.
 */
size_t qwalk_state_width(const struct QwalkState *state);

/**
 * Squared norm of the state.
 *
 * # Safety
 * `state` must be a live handle or null; `out` must be writable or null.
 */
enum QwalkStatus qwalk_state_norm_sqr(const struct QwalkState *state, double *out);

/**
 * First and second moments of the position distribution.
 *
 * # Safety
 * `state` must be a live handle or null; `mean` and `second` writable or null.
 */
enum QwalkStatus qwalk_state_moments(const struct QwalkState *state, double *mean, double *second);

/**
 * Writes `P(n)` for `n = -t_max..=t_max` into `buf[n + t_max]`.
 * `len` must be at least `qwalk_state_width`.
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum QwalkStatus qwalk_state_distribution(const struct QwalkState *state, double *buf, size_t len);

/**
 * Copies the chirality amplitudes as interleaved `(re, im)` pairs: `r` and
 * `l` each receive `2 * width` doubles.
 *
 * # Safety
 * `r` and `l` must each point to `len` writable doubles.
 */
enum QwalkStatus qwalk_state_amplitudes(const struct QwalkState *state,
                                        double *r,
                                        double *l,
                                        size_t len);

/**
 * Noise source with standard deviation `alpha` for run `run_index` of the
 * ensemble keyed by `seed`.
 */
enum QwalkStatus qwalk_noise_new(double alpha,
                                 uint64_t seed,
                                 uint64_t run_index,
                                 struct QwalkNoise **out);

/**
 * Releases a noise source. Null is ignored.
 *
 * # Safety
 * `noise` must come from `qwalk_noise_new` and not be freed twice.
 */
void qwalk_noise_free(struct QwalkNoise *noise);

/**
 * Measured-coin channel with measurement probability `p` for run
 * `run_index` of the ensemble keyed by `seed`.
 */
enum QwalkStatus qwalk_decoherence_new(double p,
                                       uint64_t seed,
                                       uint64_t run_index,
                                       struct QwalkDecoherence **out);

/**
 * Releases a channel. Null is ignored.
 *
 * # Safety
 * `channel` must come from `qwalk_decoherence_new` and not be freed twice.
 */
void qwalk_decoherence_free(struct QwalkDecoherence *channel);

/**
 * Exact classical walk distribution at time `t`: writes `P(n)` for
 * `n = -t..=t` into `buf[n + t]`, so `len >= 2 t + 1`.
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum QwalkStatus qwalk_classical_distribution(size_t t, double *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QWALK_H */
