#ifndef DELONE_FFI_H
#define DELONE_FFI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every entry point.
typedef enum delone_status {
  DELONE_STATUS_OK = 0,
  DELONE_STATUS_NULL_POINTER = 1,
  DELONE_STATUS_INVALID_ARGUMENT = 2,
  // Malformed JSON or a document that does not match the expected shape.
  DELONE_STATUS_PARSE = 3,
  // The window or work budget is too small for the request.
  DELONE_STATUS_BUDGET = 4,
  DELONE_STATUS_INSUFFICIENT_DATA = 5,
  // A continued fraction ran out of terms, or the geometry is degenerate.
  DELONE_STATUS_NUMERIC = 6,
  // The caller's output buffer is too short.
  DELONE_STATUS_BUFFER_TOO_SMALL = 7,
  DELONE_STATUS_INTERNAL = 8,
} delone_status;

// A finite window of a point set (exact or imported).
typedef struct delone_set delone_set;

// Repetitivity bracket `m_lower <= M(T) <= m_upper` with the patch-class count found.
typedef struct delone_bracket {
  double t;
  double m_lower;
  double m_upper;
  size_t n_lower;
  bool flagged;
} delone_bracket;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next call into this library from the same thread.
const char *delone_last_error(void);

// Materializes the set described by `descriptor_json` (a generator descriptor
// such as `{"construction": "integer-lattice", "n": 2}`) in the cube
// `[-half_side, half_side]^n`.
//
// # Safety
// `descriptor_json` must be a nul-terminated string; `out` must be writable.
enum delone_status delone_set_generate(const char *descriptor_json,
                                       double half_side,
                                       struct delone_set **out);

// Reads a point-set document (exact or float) as written by [`delone_set_to_json`].
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum delone_status delone_set_from_json(const char *json, struct delone_set **out);

// # Safety
// `set` must come from this library and not be used afterwards. Null is ignored.
void delone_set_free(struct delone_set *set);

// Number of points; 0 for a null handle.
//
// # Safety
// `set` must be null or a live handle.
size_t delone_set_len(const struct delone_set *set);

// Ambient dimension; 0 for a null handle.
//
// # Safety
// `set` must be null or a live handle.
size_t delone_set_dimension(const struct delone_set *set);

// Copies row-major coordinates into `buf`, which must hold `len * dimension` doubles.
//
// # Safety
// `buf` must be valid for `buf_len` writes.
enum delone_status delone_set_positions(const struct delone_set *set, double *buf, size_t buf_len);

// Serializes the set; release the string with [`delone_string_free`].
//
// # Safety
// `set` must be a live handle; `out` must be writable.
enum delone_status delone_set_to_json(const struct delone_set *set, char **out);

// # Safety
// `s` must come from this library. Null is ignored.
void delone_string_free(char *s);

// Number of `T`-patch classes among points whose `T`-ball lies in the window.
// `flagged` (optional) reports distances within tolerance of `T`.
//
// # Safety
// `set` must be a live handle; `count` must be writable; `flagged` may be null.
enum delone_status delone_atlas_count(const struct delone_set *set,
                                      double t,
                                      size_t *count,
                                      bool *flagged);

// Certified bracket on the repetitivity function at radius `t`, using the default resolution.
//
// # Safety
// `set` must be a live handle; `out` must be writable.
enum delone_status delone_repetitivity(const struct delone_set *set,
                                       double t,
                                       struct delone_bracket *out);

// Recurrence function of the Sturmian word with slope `alpha`, as a decimal
// string (it can exceed 64 bits). `alpha` uses the same syntax as the CLI,
// e.g. `golden` or `cf:1,2,[3]`.
//
// # Safety
// `alpha` must be a nul-terminated string; `out` must be writable.
enum delone_status delone_recurrence_formula(const char *alpha, uint64_t l, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DELONE_FFI_H */
