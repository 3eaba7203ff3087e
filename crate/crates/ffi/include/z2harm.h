#ifndef Z2HARM_H
#define Z2HARM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define Z2H_OK 0

#define Z2H_NULL_POINTER 1

#define Z2H_INVALID_UTF8 2

#define Z2H_SCHEMA 3

#define Z2H_NOT_A_FORM 4

#define Z2H_DIMENSION 5

#define Z2H_ON_BRANCH_LOCUS 6

#define Z2H_NO_POTENTIAL 7

#define Z2H_NUMERIC 8

#define Z2H_BUFFER_TOO_SMALL 9

#define Z2H_UNKNOWN_SUITE 10

#define Z2H_INCOMPATIBLE 11

#define Z2H_PANIC 12

/*
 A constructed Z2 harmonic function or 1-form.
 */
typedef struct Z2hForm Z2hForm;

/*
 A point with a chosen square-root branch.
 */
typedef struct Z2hState Z2hState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Static description of a status code. Never null; not to be freed.
 */
const char *z2h_status_message(int32_t code);

/*
 Builds a form from descriptor JSON.

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
int32_t z2h_form_new(const char *json, struct Z2hForm **out);

/*
 # Safety
 `form` must come from `z2h_form_new` and not be used afterwards.
 */
void z2h_form_free(struct Z2hForm *form);

/*
 Real dimension of the domain.

 # Safety
 Pointers must be valid.
 */
int32_t z2h_form_dim(const struct Z2hForm *form, size_t *out);

/*
 State at `x` on the principal branch times `sign` (`+1` or `-1`).

 # Safety
 `x` must point to `len` doubles; other pointers must be valid.
 */
int32_t z2h_state_new(const struct Z2hForm *form,
                      const double *x,
                      size_t len,
                      int32_t sign,
                      struct Z2hState **out);

/*
 # Safety
 `state` must come from `z2h_state_new` and not be used afterwards.
 */
void z2h_state_free(struct Z2hState *state);

/*
 Sign (`+1`/`-1`) of the state against the principal root.

 # Safety
 Pointers must be valid.
 */
int32_t z2h_state_sign(const struct Z2hState *state, int32_t *out);

/*
 Continues `state` along a polyline of `n_points` points (row-major,
 `dim` coordinates each) starting at the state's point; the state is
 replaced by the state at the end (at the start again if `closed`).

 # Safety
 `points` must hold `n_points * dim` doubles; other pointers must be valid.
 */
int32_t z2h_state_continue(const struct Z2hForm *form,
                           struct Z2hState *state,
                           const double *points,
                           size_t n_points,
                           bool closed);

/*
 The potential at the state.

 # Safety
 Pointers must be valid.
 */
int32_t z2h_eval_f(const struct Z2hForm *form, const struct Z2hState *state, double *out);

/*
 Components of the 1-form at the state into `out[0..dim]`.

 # Safety
 `out` must hold `out_len` doubles; other pointers must be valid.
 */
int32_t z2h_eval_omega(const struct Z2hForm *form,
                       const struct Z2hState *state,
                       double *out,
                       size_t out_len);

/*
 Sign picked up around a closed polyline of `n_points` points.

 # Safety
 `points` must hold `n_points * dim` doubles; other pointers must be valid.
 */
int32_t z2h_monodromy(const struct Z2hForm *form,
                      const double *points,
                      size_t n_points,
                      int32_t *out_sign);

/*
 Runs a suite and returns the JSON report in `*out_json` (free with
 `z2h_string_free`) and whether every check passed in `*out_passed`.

 # Safety
 Strings must be NUL-terminated; out pointers must be valid.
 */
int32_t z2h_verify(const char *json,
                   const char *suite,
                   uint64_t seed,
                   char **out_json,
                   bool *out_passed);

/*
 # Safety
 `s` must come from this library and not be used afterwards.
 */
void z2h_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* Z2HARM_H */
