#ifndef CLUSTER_SEEDS_H
#define CLUSTER_SEEDS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CsLevel {
  CS_LEVEL_SEED = 0,
  CS_LEVEL_QUIVER = 1,
} CsLevel;

typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  CS_STATUS_INVALID_ARGUMENT = 2,
  CS_STATUS_UNKNOWN_PRESET = 3,
  CS_STATUS_OUT_OF_RANGE = 4,
  CS_STATUS_FROZEN_VERTEX = 5,
  CS_STATUS_LIMIT_EXCEEDED = 6,
  CS_STATUS_PANIC = 7,
} CsStatus;

// Opaque exploration report.
typedef struct CsReport CsReport;

// Opaque labelled seed.
typedef struct CsSeed CsSeed;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates the initial seed of a built-in quiver such as `"A3"`.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum CsStatus cs_seed_from_preset(const char *name, struct CsSeed **out);

// Parses a quiver or seed in the JSON format used by the command line.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum CsStatus cs_seed_from_json(const char *json, struct CsSeed **out);

// Number of vertices, or 0 for a null handle.
//
// # Safety
// `seed` must be null or a live handle.
uintptr_t cs_seed_rank(const struct CsSeed *seed);

// Mutates `seed` in place at the one-based `vertex`.
//
// # Safety
// `seed` must be null or a live handle.
enum CsStatus cs_seed_mutate(struct CsSeed *seed, uintptr_t vertex);

// Relabels `seed` in place by the permutation with one-based `images[0..len]`.
//
// # Safety
// `seed` must be null or a live handle; `images` must point to `len` values.
enum CsStatus cs_seed_permute(struct CsSeed *seed, const uintptr_t *images, uintptr_t len);

// Whether two handles hold equal labelled seeds.
//
// # Safety
// Both arguments must be null or live handles.
bool cs_seed_equal(const struct CsSeed *a, const struct CsSeed *b);

// `(quiver, (x1, ...))` as a new string; free with [`cs_string_free`].
//
// # Safety
// `seed` must be null or a live handle.
char *cs_seed_render(const struct CsSeed *seed);

// The seed as JSON; free with [`cs_string_free`].
//
// # Safety
// `seed` must be null or a live handle.
char *cs_seed_json(const struct CsSeed *seed);

// # Safety
// `seed` must be null or a handle not yet freed.
void cs_seed_free(struct CsSeed *seed);

// Explores the class of `seed` up to `budget` members.
//
// # Safety
// `seed` must be a live handle; `out` must be writable.
enum CsStatus cs_explore(const struct CsSeed *seed,
                         uintptr_t budget,
                         enum CsLevel level,
                         struct CsReport **out);

// # Safety
// `report` must be null or a live handle.
uintptr_t cs_report_seed_count(const struct CsReport *report);

// # Safety
// `report` must be null or a live handle.
bool cs_report_is_closed(const struct CsReport *report);

// The full report as JSON; free with [`cs_string_free`].
//
// # Safety
// `report` must be null or a live handle.
char *cs_report_json(const struct CsReport *report);

// # Safety
// `report` must be null or a handle not yet freed.
void cs_report_free(struct CsReport *report);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void cs_string_free(char *s);

// Message of the last failed call on this thread, or null. The pointer is
// owned by the library and valid until the next failing call.
const char *cs_last_error_message(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CLUSTER_SEEDS_H */
