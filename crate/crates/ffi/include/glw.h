#ifndef GLW_H
#define GLW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum GlwStatus {
  GLW_STATUS_OK = 0,
  GLW_STATUS_NULL_POINTER = 1,
  GLW_STATUS_INVALID_UTF8 = 2,
  GLW_STATUS_PARSE = 3,
  GLW_STATUS_GUARD = 4,
  GLW_STATUS_DOMAIN = 5,
  GLW_STATUS_INTERNAL = 6,
} GlwStatus;

// A parsed formula.
typedef struct GlwFormula GlwFormula;

// A Γ-labeled measure structure.
typedef struct GlwGamma GlwGamma;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent failure on this thread; empty if none.
// The pointer stays valid until the next failing call on this thread.
const char *glw_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void glw_string_free(char *s);

// Parses `text` into a new formula handle stored in `*out`.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum GlwStatus glw_formula_parse(const char *text, struct GlwFormula **out);

// Canonical printed form of a formula.
//
// # Safety
// `f` must be a live formula handle and `out` a valid pointer.
enum GlwStatus glw_formula_print(const struct GlwFormula *f, char **out);

// Nesting depth of modal operators; 0 for a null handle.
//
// # Safety
// `f` must be null or a live formula handle.
uintptr_t glw_formula_modal_depth(const struct GlwFormula *f);

// # Safety
// `f` must be null or a live formula handle; it is invalid afterwards.
void glw_formula_free(struct GlwFormula *f);

// Decides GL-validity. `*out` receives a JSON verdict document: either
// `{"verdict":"valid"}` or a countermodel with its refuting world.
//
// # Safety
// `f` must be a live formula handle and `out` a valid pointer.
enum GlwStatus glw_decide_json(const struct GlwFormula *f, char **out);

// Builds the Γ-labeled structure for `K_n` truncated at branching `b`
// with `m` measures per block pair.
//
// # Safety
// `out` must be a valid pointer.
enum GlwStatus glw_gamma_build(uint32_t n, uint32_t b, uint32_t m, struct GlwGamma **out);

// Checks the four labeling conditions. `*condition` is 0 when all hold,
// otherwise the number of the first failing condition.
//
// # Safety
// `g` must be a live handle and `condition` a valid pointer.
enum GlwStatus glw_gamma_validate(const struct GlwGamma *g, uint32_t *condition);

// Number of points; 0 for a null handle.
//
// # Safety
// `g` must be null or a live handle.
uintptr_t glw_gamma_point_count(const struct GlwGamma *g);

// # Safety
// `g` must be a live handle and `out` a valid pointer.
enum GlwStatus glw_gamma_mitchell_rank(const struct GlwGamma *g, uintptr_t point, uintptr_t *out);

// The structure file document of a labeling.
//
// # Safety
// `g` must be a live handle and `out` a valid pointer.
enum GlwStatus glw_gamma_to_json(const struct GlwGamma *g, char **out);

// # Safety
// `g` must be null or a live handle; it is invalid afterwards.
void glw_gamma_free(struct GlwGamma *g);

// Normalizes an ordinal literal such as `w+w^2*2+3` to Cantor normal form.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum GlwStatus glw_ordinal_normalize(const char *text, char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* GLW_H */
