/* SPDX-License-Identifier: Apache-2.0 */

#ifndef SQNL_H
#define SQNL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  SQNL_ACTIVATION_SQNL = 0,
  SQNL_ACTIVATION_SQ_LOG_SIG = 1,
  SQNL_ACTIVATION_SQLU = 2,
  SQNL_ACTIVATION_SQ_SOFTMAX = 3,
  SQNL_ACTIVATION_SQ_SQISH = 4,
  SQNL_ACTIVATION_SQ_REU = 5,
} SqnlActivation;

typedef enum {
  SQNL_MODE_SYMMETRIC = 0,
  SQNL_MODE_LOG_SQNL = 1,
  SQNL_MODE_ASYMMETRIC = 2,
  SQNL_MODE_GATED = 3,
} SqnlMode;

typedef enum {
  SQNL_STATUS_OK = 0,
  SQNL_STATUS_NULL_POINTER = 1,
  SQNL_STATUS_INVALID_ARGUMENT = 2,
  SQNL_STATUS_OUT_OF_RANGE = 3,
  SQNL_STATUS_UNSUPPORTED = 4,
  SQNL_STATUS_DIMENSION_MISMATCH = 5,
  SQNL_STATUS_PARSE_ERROR = 6,
  SQNL_STATUS_BUFFER_TOO_SMALL = 7,
  SQNL_STATUS_INTERNAL = 8,
} SqnlStatus;

/**
 * Opaque generator handle.
 */
typedef struct SqnlGenerator SqnlGenerator;

/**
 * Opaque fixed-point LSTM cell handle.
 */
typedef struct SqnlLstm SqnlLstm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code. Never null.
 */
const char *sqnl_status_message(SqnlStatus status);

/**
 * Detail of the last failure on this thread, empty after a success. The
 * pointer stays valid until the next call into this library on the same
 * thread.
 */
const char *sqnl_last_error(void);

/**
 * Creates a generator. `alpha` is only read in asymmetric mode.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
SqnlStatus sqnl_generator_new(uint32_t width,
                              uint64_t len,
                              SqnlMode mode,
                              int64_t alpha,
                              SqnlGenerator **out);

/**
 * # Safety
 * `gen` must be null or a handle from [`sqnl_generator_new`] not yet freed.
 */
void sqnl_generator_free(SqnlGenerator *gen);

/**
 * Evaluates one input. `c_scale` is used only when `has_c` is true, which is
 * required in gated mode and rejected otherwise.
 *
 * # Safety
 * `gen` must be a live handle and `out` a valid writable pointer.
 */
SqnlStatus sqnl_generator_eval(const SqnlGenerator *gen,
                               int64_t n,
                               bool has_c,
                               int64_t c_scale,
                               int64_t *out);

/**
 * Writes the outputs for every input from `-2^(R-1)` upwards into `buf`.
 * `written` receives the number of entries (`2^R`); when `capacity` is too
 * small nothing is copied and `written` holds the required size.
 *
 * # Safety
 * `gen` must be a live handle, `buf` must hold `capacity` writable `i64`s
 * (or be null when `capacity` is 0) and `written` must be writable.
 */
SqnlStatus sqnl_generator_map(const SqnlGenerator *gen,
                              bool has_c,
                              int64_t c_scale,
                              int64_t *buf,
                              uintptr_t capacity,
                              uintptr_t *written);

/**
 * # Safety
 * `out` must be a valid writable pointer.
 */
SqnlStatus sqnl_activate(SqnlActivation kind, double x, double *out);

/**
 * Right-hand derivative at knees.
 *
 * # Safety
 * `out` must be a valid writable pointer.
 */
SqnlStatus sqnl_derivative(SqnlActivation kind, double x, double *out);

/**
 * Gate count of one block, e.g. `"adder"` or `"lut_two_sided"`.
 *
 * # Safety
 * `kind` must be a NUL-terminated string and `out` a valid writable pointer.
 */
SqnlStatus sqnl_gate_cost(const char *kind, uint32_t width, uint64_t *out);

/**
 * Exact closed-form gated value as a reduced fraction `num / den`.
 *
 * # Safety
 * `num` and `den` must be valid writable pointers.
 */
SqnlStatus sqnl_gated_exact(uint32_t width, int64_t c_scale, int64_t n, int64_t *num, int64_t *den);

/**
 * Builds a fixed-point LSTM cell, with zero state, from a JSON weight
 * fixture.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid writable pointer.
 */
SqnlStatus sqnl_lstm_from_json(const char *json, SqnlLstm **out);

/**
 * Advances the cell by one step. `hidden` receives the new hidden state and
 * `cell` (optional, may be null) the new cell state; both hold
 * `hidden_len` entries.
 *
 * # Safety
 * `lstm` must be a live handle, `x` must point to `x_len` readable values and
 * `hidden` (and `cell` when non-null) to `hidden_len` writable values.
 */
SqnlStatus sqnl_lstm_step(SqnlLstm *lstm,
                          const int64_t *x,
                          uintptr_t x_len,
                          int64_t *hidden,
                          int64_t *cell,
                          uintptr_t hidden_len);

/**
 * # Safety
 * `lstm` must be null or a handle from [`sqnl_lstm_from_json`] not yet freed.
 */
void sqnl_lstm_free(SqnlLstm *lstm);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SQNL_H */
