#ifndef NORMONE_H
#define NORMONE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum {
  NORMONE_STATUS_OK = 0,
  /**
   * A parameter is out of range or inconsistent.
   */
  NORMONE_STATUS_INVALID_ARGUMENT = 1,
  /**
   * An input document or string could not be parsed.
   */
  NORMONE_STATUS_PARSE = 2,
  /**
   * A mathematical precondition failed.
   */
  NORMONE_STATUS_PRECONDITION = 3,
  /**
   * A required pointer was null.
   */
  NORMONE_STATUS_NULL_POINTER = 4,
  /**
   * An exact integer computation overflowed its fixed-width bound.
   */
  NORMONE_STATUS_OVERFLOW = 5,
  /**
   * An internal panic was caught at the boundary.
   */
  NORMONE_STATUS_PANIC = 6,
} NormoneStatus;

/**
 * A generated chain of lift steps.
 */
typedef struct NormoneChain NormoneChain;

/**
 * A polynomial in the shifts `σ^j(x)`.
 */
typedef struct NormonePoly NormonePoly;

/**
 * The message for the last failed call on this thread, or null. Release
 * with [`normone_string_free`].
 */
char *normone_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void normone_string_free(char *s);

/**
 * Builds the norm-one element for `Z/p^n`.
 *
 * `strategy` is `"unit"`, `"doubling"`, or a list such as `"2:1,4:2"`;
 * null means doubling. With `verify` set, every step is certified.
 *
 * # Safety
 * `strategy` is null or a NUL-terminated string; `out_chain` is writable.
 */
NormoneStatus normone_generate(uint32_t p,
                               uint32_t n,
                               const char *strategy,
                               bool verify,
                               NormoneChain **out_chain);

/**
 * # Safety
 * `chain` is null or a handle from [`normone_generate`], freed once.
 */
void normone_chain_free(NormoneChain *chain);

/**
 * Number of lift steps in the chain.
 *
 * # Safety
 * Pointers are valid.
 */
NormoneStatus normone_chain_step_count(const NormoneChain *chain, size_t *out_count);

/**
 * Whether every step passed its certificate (false when verification was off).
 *
 * # Safety
 * Pointers are valid.
 */
NormoneStatus normone_chain_certified(const NormoneChain *chain, bool *out_ok);

/**
 * The final element over the base generators. Fails with
 * `InvalidArgument` when the chain was too large to expand.
 *
 * # Safety
 * Pointers are valid.
 */
NormoneStatus normone_chain_final(const NormoneChain *chain, NormonePoly **out_poly);

/**
 * The chain document `{"p", "n", "strategy", "steps", "final"}`.
 *
 * # Safety
 * Pointers are valid.
 */
NormoneStatus normone_chain_to_json(const NormoneChain *chain, char **out_json);

/**
 * Parses a polynomial document `{"p", "n", "terms": [{"c", "w"}]}`.
 *
 * # Safety
 * `json` is NUL-terminated; `out_poly` is writable.
 */
NormoneStatus normone_poly_from_json(const char *json, NormonePoly **out_poly);

/**
 * # Safety
 * `poly` is null or a handle from this library, freed once.
 */
void normone_poly_free(NormonePoly *poly);

/**
 * # Safety
 * Pointers are valid.
 */
NormoneStatus normone_poly_to_json(const NormonePoly *poly, char **out_str);

/**
 * # Safety
 * Pointers are valid.
 */
NormoneStatus normone_poly_to_text(const NormonePoly *poly, char **out_str);

/**
 * # Safety
 * Pointers are valid.
 */
NormoneStatus normone_poly_to_latex(const NormonePoly *poly, char **out_str);

/**
 * Whether `N_{G_m}(poly) = 1` modulo the elementary relations.
 *
 * # Safety
 * Pointers are valid.
 */
NormoneStatus normone_poly_is_norm_one(const NormonePoly *poly, uint32_t m, bool *out_ok);

/**
 * Number of monomials, after the normal form when `reduced` is set.
 *
 * # Safety
 * Pointers are valid.
 */
NormoneStatus normone_poly_monomial_count(const NormonePoly *poly, bool reduced, size_t *out_count);

/**
 * Evaluates `N_{G_m}(poly)` on a seeded ring of `dim × dim` integer matrix
 * valued functions (`dim = 0` means integers) and reports whether it is 1.
 *
 * # Safety
 * Pointers are valid.
 */
NormoneStatus normone_poly_check_numeric(const NormonePoly *poly,
                                         size_t dim,
                                         uint64_t seed,
                                         uint32_t m,
                                         bool *out_ok);

/**
 * Tate cohomology of the lattices in `{"actions": [{"name", "order", "matrix"}]}`,
 * returned as a JSON array of `{"name", "order", "dim", "h1", "h2"}`.
 *
 * # Safety
 * `json` is NUL-terminated; `out_json` is writable.
 */
NormoneStatus normone_cohomology(const char *json, char **out_json);

#endif  /* NORMONE_H */
