#ifndef BRIDGESIM_H
#define BRIDGESIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BsStatus {
  BS_STATUS_OK = 0,
  BS_STATUS_NULL_POINTER = 1,
  BS_STATUS_INVALID_ARGUMENT = 2,
  BS_STATUS_TRAJECTORY = 3,
  BS_STATUS_PROTOCOL = 4,
  BS_STATUS_PERCEPTION = 5,
  BS_STATUS_METRICS = 6,
  BS_STATUS_BUFFER_TOO_SMALL = 7,
  BS_STATUS_EMPTY = 8,
  BS_STATUS_PANIC = 9,
} BsStatus;

/**
 * Incremental frame decoder with a queue of decoded messages.
 */
typedef struct BsFrameParser BsFrameParser;

/**
 * Piecewise quintic through timed waypoints.
 */
typedef struct BsSpline BsSpline;

/**
 * Header and scalar fields of a decoded message. Fields that the message
 * type does not carry are zero.
 */
typedef struct BsMessageInfo {
  uint8_t msg_type;
  uint32_t seq;
  uint64_t t_send_ns;
  uint8_t side;
  /**
   * Joint count of an ArmRefSample or GoalArmTrajectory.
   */
  uint16_t dof;
  /**
   * Waypoint count of a GoalArmTrajectory.
   */
  uint32_t waypoints;
  uint32_t goal_seq;
  uint8_t status;
  /**
   * Feedback progress or gripper position.
   */
  double value;
} BsMessageInfo;

typedef struct BsIntrinsics {
  double fx;
  double fy;
  double cx;
  double cy;
  uint32_t width;
  uint32_t height;
} BsIntrinsics;

typedef struct BsRoi {
  double u_min;
  double v_min;
  double u_max;
  double v_max;
} BsRoi;

/**
 * Fitted box: eight corners (bottom four, then top four, each as x, y, z)
 * and the center, camera frame.
 */
typedef struct BsBox {
  double corners[24];
  double center[3];
} BsBox;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *bs_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated,
 * always NUL-terminated when `cap > 0`). Returns the length the full
 * message needs including the terminator, or 0 when there is no error.
 *
 * # Safety
 * `buf` must be valid for `cap` bytes or `NULL` with `cap == 0`.
 */
size_t bs_last_error_message(char *buf, size_t cap);

/**
 * Quintic coefficients `c0..c5` over `[0, duration]` matching position,
 * velocity and acceleration at both ends. `out` receives six values.
 *
 * # Safety
 * `out` must be valid for six doubles.
 */
enum BsStatus bs_quintic_coeffs(double p0,
                                double v0,
                                double a0,
                                double p1,
                                double v1,
                                double a1,
                                double duration,
                                double *out);

/**
 * Builds a spline through `n` waypoints. `times` holds `n` strictly
 * increasing times; `positions` holds `n × dof` angles, row-major.
 * Interior velocities and accelerations are derived from neighbours and
 * both ends start and stop at rest.
 *
 * # Safety
 * `times` and `positions` must be valid for `n` and `n * dof` doubles;
 * `out` must be a valid pointer.
 */
enum BsStatus bs_spline_new(const double *times,
                            const double *positions,
                            size_t n,
                            size_t dof,
                            struct BsSpline **out);

/**
 * # Safety
 * `spline` must come from [`bs_spline_new`] and not be used afterwards.
 */
void bs_spline_free(struct BsSpline *spline);

/**
 * Joint count and time span of a spline. Any output may be `NULL`.
 *
 * # Safety
 * `spline` must be a live handle; non-NULL outputs must be valid.
 */
enum BsStatus bs_spline_info(const struct BsSpline *spline,
                             size_t *dof,
                             double *start,
                             double *end);

/**
 * Evaluates the spline at `t`, clamped to its span. Each output holds
 * `dof` doubles; `v` and `a` may be `NULL`.
 *
 * # Safety
 * `spline` must be a live handle and outputs valid for `dof` doubles.
 */
enum BsStatus bs_spline_eval(const struct BsSpline *spline,
                             double t,
                             double *q,
                             double *v,
                             double *a);

/**
 * Encodes an ArmRefSample frame into `buf`. `len` receives the frame size,
 * also when the buffer is too small.
 *
 * # Safety
 * `q` must be valid for `dof` doubles, `buf` for `cap` bytes, `len` valid.
 */
enum BsStatus bs_encode_arm_ref_sample(uint32_t seq,
                                       uint64_t t_send_ns,
                                       uint8_t side,
                                       const double *q,
                                       size_t dof,
                                       uint8_t *buf,
                                       size_t cap,
                                       size_t *len);

/**
 * Encodes a Result frame for goal `goal_seq`.
 *
 * # Safety
 * `buf` must be valid for `cap` bytes and `len` valid.
 */
enum BsStatus bs_encode_result(uint32_t seq,
                               uint64_t t_send_ns,
                               uint32_t goal_seq,
                               uint8_t status,
                               uint8_t *buf,
                               size_t cap,
                               size_t *len);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum BsStatus bs_frame_parser_new(struct BsFrameParser **out);

/**
 * # Safety
 * `parser` must come from [`bs_frame_parser_new`] and not be used afterwards.
 */
void bs_frame_parser_free(struct BsFrameParser *parser);

/**
 * Feeds bytes in any chunking. `decoded` (may be `NULL`) receives how many
 * complete messages this call queued. A malformed frame returns
 * `BS_STATUS_PROTOCOL` and discards the buffered bytes.
 *
 * # Safety
 * `parser` must be a live handle and `bytes` valid for `len` bytes.
 */
enum BsStatus bs_frame_parser_feed(struct BsFrameParser *parser,
                                   const uint8_t *bytes,
                                   size_t len,
                                   size_t *decoded);

/**
 * Pops the oldest decoded message. For ArmRefSample frames the joint
 * angles are copied to `q` when `q_cap >= dof`; otherwise `q` is left
 * alone. Returns `BS_STATUS_EMPTY` when nothing is queued.
 *
 * # Safety
 * `parser` must be a live handle, `info` valid, `q` valid for `q_cap`
 * doubles or `NULL`.
 */
enum BsStatus bs_frame_parser_next(struct BsFrameParser *parser,
                                   struct BsMessageInfo *info,
                                   double *q,
                                   size_t q_cap);

/**
 * Fits one box of known extents `[width, depth, height]` inside `roi`.
 * `points` holds `n × 3` camera-frame coordinates; `down` is the gravity
 * direction in the camera frame, used to find the floor.
 *
 * # Safety
 * `points` must be valid for `3 * n` doubles, `extents` and `down` for
 * three, `out` valid.
 */
enum BsStatus bs_detect_box(const double *points,
                            size_t n,
                            struct BsIntrinsics intrinsics,
                            struct BsRoi roi,
                            const double *extents,
                            const double *down,
                            struct BsBox *out);

/**
 * Population standard deviation of `measured − reference` per joint.
 * Both series hold `n × dof` values, row-major; `std_out` receives `dof`
 * values and `max_out` (may be `NULL`) their maximum.
 *
 * # Safety
 * Inputs must be valid for `n * dof` doubles and `std_out` for `dof`.
 */
enum BsStatus bs_tracking_std(const double *reference,
                              const double *measured,
                              size_t n,
                              size_t dof,
                              double *std_out,
                              double *max_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BRIDGESIM_H */
