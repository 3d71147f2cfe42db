#ifndef SUPERP2_H
#define SUPERP2_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Sp2Status {
  SP2_STATUS_OK = 0,
  // A verification ran and reported a failure.
  SP2_STATUS_CHECK_FAILED = 1,
  // Bad arguments: malformed rational, descriptor, expression, flags.
  SP2_STATUS_USAGE = 2,
  SP2_STATUS_CAP_EXCEEDED = 3,
  SP2_STATUS_NULL_POINTER = 4,
  SP2_STATUS_INVALID_UTF8 = 5,
  // Computation error or caught panic.
  SP2_STATUS_INTERNAL = 6,
} Sp2Status;

// The P2 family at a fixed or formal lambda.
typedef struct Sp2Family Sp2Family;

// A super Grassmannian with all big cells built.
typedef struct Sp2Grassmannian Sp2Grassmannian;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failing call on this thread; empty after a success.
// The pointer stays valid until the next call into this library on the
// same thread.
const char *sp2_last_error(void);

// # Safety
// `s` is null or a string returned by this library that was not freed yet.
void sp2_string_free(char *s);

// Run a command line (without the program name) and return its JSON report.
// The report is written even when a check fails, in which case the status
// is `CheckFailed`.
//
// # Safety
// `argv` points to `argc` valid NUL-terminated strings; `out_json` is a
// valid pointer.
enum Sp2Status sp2_run(size_t argc, const char *const *argv, char **out_json);

// Build the family. `lambda` is an exact rational such as `"-3/2"`, or null
// for a formal parameter.
//
// # Safety
// `lambda` is null or a valid string; `out` is a valid pointer.
enum Sp2Status sp2_family_new(const char *lambda, struct Sp2Family **out);

// # Safety
// `h` is null or a handle from [`sp2_family_new`] that was not freed yet.
void sp2_family_free(struct Sp2Family *h);

// # Safety
// `h` is a live family handle and `out` a valid pointer.
enum Sp2Status sp2_family_cocycle_ok(const struct Sp2Family *h, bool *out);

// Whether the odd-odd cochain of the atlas is nonzero (the family is
// non-split exactly when it is).
//
// # Safety
// `h` is a live family handle and `out` a valid pointer.
enum Sp2Status sp2_family_omega_nonzero(const struct Sp2Family *h, bool *out);

// Atlas as JSON; free with [`sp2_string_free`].
//
// # Safety
// `h` is a live family handle and `out_json` a valid pointer.
enum Sp2Status sp2_family_atlas_json(const struct Sp2Family *h, char **out_json);

// Dimension of the solved space of global vector fields. Needs a numeric
// lambda.
//
// # Safety
// `h` is a live family handle; `even` and `odd` are valid pointers.
enum Sp2Status sp2_family_sections_dims(const struct Sp2Family *h,
                                        uint32_t degree_bound,
                                        size_t *even,
                                        size_t *odd);

// # Safety
// `out` is a valid pointer.
enum Sp2Status sp2_grass_new(size_t d0,
                             size_t d1,
                             size_t n,
                             size_t m,
                             size_t cap,
                             struct Sp2Grassmannian **out);

// # Safety
// `h` is null or a handle from [`sp2_grass_new`] that was not freed yet.
void sp2_grass_free(struct Sp2Grassmannian *h);

// # Safety
// `h` is a live handle; `cells`, `even_dim` and `odd_dim` are valid pointers.
enum Sp2Status sp2_grass_info(const struct Sp2Grassmannian *h,
                              size_t *cells,
                              size_t *even_dim,
                              size_t *odd_dim);

// Check the cocycle condition on every triple of cells.
//
// # Safety
// `h` is a live handle and `out` a valid pointer.
enum Sp2Status sp2_grass_cocycle_ok(const struct Sp2Grassmannian *h, bool *out);

// `h^q` of a sheaf expression such as `"T(-3) on P2"`.
//
// # Safety
// `expr` is a valid string; `even` and `odd` are valid pointers.
enum Sp2Status sp2_cohomology(const char *expr, size_t q, size_t *even, size_t *odd);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUPERP2_H */
