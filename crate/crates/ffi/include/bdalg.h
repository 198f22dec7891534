#ifndef BDALG_H
#define BDALG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum BdalgStatus {
  BDALG_STATUS_OK = 0,
  BDALG_STATUS_NULL_POINTER = 1,
  BDALG_STATUS_INVALID_UTF8 = 2,
  BDALG_STATUS_INVALID_INPUT = 3,
  /**
   * Scenario text is not JSON.
   */
  BDALG_STATUS_PARSE = 4,
  /**
   * Scenario JSON does not match the schema.
   */
  BDALG_STATUS_SCHEMA = 5,
  BDALG_STATUS_OPERATION = 6,
  /**
   * A coordinate does not fit in `int64_t`.
   */
  BDALG_STATUS_OVERFLOW = 7,
  BDALG_STATUS_OUT_OF_RANGE = 8,
  BDALG_STATUS_PANIC = 9,
} BdalgStatus;

/**
 * Rational polyhedral cone in R^r.
 */
typedef struct BdalgCone BdalgCone;

/**
 * Finitely generated submonoid of N^r.
 */
typedef struct BdalgMonoid BdalgMonoid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *bdalg_version(void);

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *bdalg_last_error_message(void);

/**
 * Monoid generated by `count` points of N^`dim`.
 *
 * # Safety
 * `generators` points to `count * dim` readable values; `out` is writable.
 */
enum BdalgStatus bdalg_monoid_new(size_t dim,
                                  const int64_t *generators,
                                  size_t count,
                                  struct BdalgMonoid **out);

/**
 * # Safety
 * `m` is NULL or came from this library and has not been freed.
 */
void bdalg_monoid_free(struct BdalgMonoid *m);

/**
 * # Safety
 * `m` is a live handle.
 */
size_t bdalg_monoid_dim(const struct BdalgMonoid *m);

/**
 * # Safety
 * `m` is a live handle.
 */
size_t bdalg_monoid_generator_count(const struct BdalgMonoid *m);

/**
 * Copies generator `index` into `out` (`dim` values).
 *
 * # Safety
 * `m` is a live handle; `out` has room for `dim` values.
 */
enum BdalgStatus bdalg_monoid_generator(const struct BdalgMonoid *m, size_t index, int64_t *out);

/**
 * Whether `p` (`dim` values) lies in the monoid.
 *
 * # Safety
 * `m` is a live handle; `p` has `dim` values; `out` is writable.
 */
enum BdalgStatus bdalg_monoid_contains(const struct BdalgMonoid *m, const int64_t *p, bool *out);

/**
 * Cone spanned by `count` integer rays in R^`dim`.
 *
 * # Safety
 * `rays` points to `count * dim` readable values; `out` is writable.
 */
enum BdalgStatus bdalg_cone_new(size_t dim,
                                const int64_t *rays,
                                size_t count,
                                struct BdalgCone **out);

/**
 * # Safety
 * `c` is NULL or came from this library and has not been freed.
 */
void bdalg_cone_free(struct BdalgCone *c);

/**
 * Whether the integer point `p` lies in the cone.
 *
 * # Safety
 * `c` is a live handle; `p` has `dim` values; `out` is writable.
 */
enum BdalgStatus bdalg_cone_contains(const struct BdalgCone *c, const int64_t *p, bool *out);

/**
 * Hilbert basis of S ∩ C as a new monoid handle.
 *
 * # Safety
 * `s` and `c` are live handles; `out` is writable.
 */
enum BdalgStatus bdalg_hilbert_basis(const struct BdalgMonoid *s,
                                     const struct BdalgCone *c,
                                     struct BdalgMonoid **out);

/**
 * Runs a scenario document and returns its JSON report.
 *
 * On `BDALG_STATUS_OK`, `*report` owns a NUL-terminated string (free with
 * [`bdalg_string_free`]) and `*exit_code` is the verdict code the CLI would
 * return: 0 pass, 2 fail, 3 inconclusive. On failure `*exit_code` carries
 * the CLI's error code (64, 65 or 70) and `*report` is NULL.
 *
 * # Safety
 * `json` is a NUL-terminated string; `report` and `exit_code` are writable.
 */
enum BdalgStatus bdalg_run_scenario_json(const char *json, char **report, int32_t *exit_code);

/**
 * # Safety
 * `s` is NULL or a string returned by this library, not yet freed.
 */
void bdalg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BDALG_H */
