#ifndef JETGEOM_H
#define JETGEOM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum MlgStatus {
  MLG_STATUS_OK = 0,
  MLG_STATUS_NULL_POINTER = 1,
  MLG_STATUS_INVALID_UTF8 = 2,
  MLG_STATUS_PARSE = 3,
  MLG_STATUS_SCENARIO = 4,
  MLG_STATUS_EVALUATION = 5,
  MLG_STATUS_SINGULAR = 6,
  MLG_STATUS_IO = 7,
  MLG_STATUS_PANIC = 8,
} MlgStatus;

// Opaque scenario handle.
typedef struct MlgScenario MlgScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a TOML scenario document.
//
// # Safety
// `toml` must be a NUL-terminated string; `out` must be writable.
enum MlgStatus mlg_scenario_from_str(const char *toml, struct MlgScenario **out);

// Loads a TOML scenario file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum MlgStatus mlg_scenario_from_file(const char *path, struct MlgScenario **out);

// Releases a scenario. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void mlg_scenario_free(struct MlgScenario *s);

// Writes `p = dim T` and `n = dim M`.
//
// # Safety
// All pointers must be valid.
enum MlgStatus mlg_dims(const struct MlgScenario *s, size_t *p, size_t *n);

// JSON geometry report at one point.
//
// `coords` holds `p + n + n·p` values: `t^α`, then `x^i`, then `x^i_α` with
// `α` varying fastest. `what` is a section name or `"all"`. A non-positive
// `tol` selects the scenario tolerance.
//
// # Safety
// `coords` must point to `len` doubles; strings must be NUL-terminated; `out` writable.
enum MlgStatus mlg_geometry_report(const struct MlgScenario *s,
                                   const char *what,
                                   const double *coords,
                                   size_t len,
                                   double tol,
                                   char **out);

// Runs the verification suite on `count` seeded random points in `[-1, 1]`.
//
// `pass` receives 1 when every class passes. `out` receives the JSON suite
// summary and may be null.
//
// # Safety
// `pass` must be writable; `out` null or writable.
enum MlgStatus mlg_verify(const struct MlgScenario *s,
                          size_t count,
                          uint64_t seed,
                          double tol,
                          int *pass,
                          char **out);

// Inverts a symmetric `k×k` row-major matrix into `out`.
//
// # Safety
// `m` and `out` must each hold `k·k` doubles.
enum MlgStatus mlg_invert_symmetric(const double *m, size_t k, double *out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void mlg_string_free(char *s);

// Message of the last failure on this thread, or null. Valid until the next call.
const char *mlg_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JETGEOM_H */
