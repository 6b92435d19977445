/* C interface to the fwss fixed weight subset sum solvers. */

#ifndef FWSS_H
#define FWSS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every entry point.
 */
typedef enum FwssStatus {
  /**
   * Call succeeded; for solvers, a solution was found and verified.
   */
  FWSS_STATUS_OK = 0,
  /**
   * Call succeeded but no solution exists within the search's guarantee.
   */
  FWSS_STATUS_NO_SOLUTION = 1,
  /**
   * Malformed input: bad JSON, bad parameters, length mismatches.
   */
  FWSS_STATUS_INPUT_ERROR = 2,
  /**
   * An enumeration cap or iteration budget was exceeded.
   */
  FWSS_STATUS_RESOURCE_ERROR = 3,
  /**
   * A required pointer argument was null.
   */
  FWSS_STATUS_NULL_POINTER = 4,
  /**
   * A string argument was not valid UTF-8.
   */
  FWSS_STATUS_UTF8_ERROR = 5,
  /**
   * Internal panic; the call had no effect.
   */
  FWSS_STATUS_PANIC = 6,
} FwssStatus;

/**
 * Which subsets fill the k-set oracle's lists.
 */
typedef enum FwssMode {
  FWSS_MODE_FIXED_WEIGHT = 0,
  FWSS_MODE_UNRESTRICTED = 1,
} FwssMode;

/**
 * Opaque problem instance.
 */
typedef struct FwssInstance FwssInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses an instance from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer; on
 * `Ok` the caller owns the handle and must release it with
 * [`fwss_instance_free`].
 */
enum FwssStatus fwss_instance_from_json(const char *json, struct FwssInstance **out);

/**
 * Draws a fresh instance; see the library's generator for the exact
 * distribution.
 *
 * # Safety
 * `out` must be valid; the returned handle is owned by the caller.
 */
enum FwssStatus fwss_instance_generate(uint64_t n,
                                       uint64_t ell,
                                       double density,
                                       uint64_t seed,
                                       bool planted,
                                       struct FwssInstance **out);

/**
 * Releases a handle returned by the constructors. Null is a no-op.
 *
 * # Safety
 * `ptr` must be a handle from this library, not yet freed.
 */
void fwss_instance_free(struct FwssInstance *ptr);

/**
 * Number of weights.
 *
 * # Safety
 * `ptr` must be a live handle.
 */
uint64_t fwss_instance_n(const struct FwssInstance *ptr);

/**
 * Prescribed solution weight.
 *
 * # Safety
 * `ptr` must be a live handle.
 */
uint64_t fwss_instance_ell(const struct FwssInstance *ptr);

/**
 * Serializes the instance to JSON.
 *
 * # Safety
 * `ptr` must be a live handle and `out` valid; the string is released with
 * [`fwss_string_free`].
 */
enum FwssStatus fwss_instance_to_json(const struct FwssInstance *ptr, char **out);

/**
 * Density statistics as JSON; pass `m = 0` to omit the modular fields.
 *
 * # Safety
 * `ptr` must be a live handle and `out` valid; free the string with
 * [`fwss_string_free`].
 */
enum FwssStatus fwss_densities_json(const struct FwssInstance *ptr, uint64_t m, char **out);

/**
 * Checks a '0'/'1' solution string: `Ok` when it solves the instance,
 * `NoSolution` when it does not.
 *
 * # Safety
 * `ptr` must be a live handle and `bits` a NUL-terminated string.
 */
enum FwssStatus fwss_verify(const struct FwssInstance *ptr, const char *bits);

/**
 * Exhaustive search. Writes a JSON report either way; `Ok` means a
 * solution was found.
 *
 * # Safety
 * `ptr` must be a live handle and `out` valid; free the report with
 * [`fwss_string_free`].
 */
enum FwssStatus fwss_solve_brute(const struct FwssInstance *ptr, char **out);

/**
 * Two-table meet-in-the-middle. `max_divisions = 0` means no explicit cap.
 *
 * # Safety
 * As [`fwss_solve_brute`].
 */
enum FwssStatus fwss_solve_mitm2(const struct FwssInstance *ptr,
                                 bool random_divisions,
                                 uint64_t seed,
                                 uint64_t max_divisions,
                                 char **out);

/**
 * Schroeppel-Shamir four-table search. `max_divisions = 0` means no
 * explicit cap.
 *
 * # Safety
 * As [`fwss_solve_brute`].
 */
enum FwssStatus fwss_solve_ss4(const struct FwssInstance *ptr,
                               bool random_divisions,
                               uint64_t seed,
                               uint64_t max_divisions,
                               char **out);

/**
 * The randomized modular k-set driver. `max_iterations = 0` selects the
 * adaptive budget; `workers > 1` runs the parallel variant.
 *
 * # Safety
 * As [`fwss_solve_brute`].
 */
enum FwssStatus fwss_solve_kset(const struct FwssInstance *ptr,
                                uint64_t k,
                                uint64_t m,
                                uint32_t alpha,
                                uint64_t max_iterations,
                                enum FwssMode mode,
                                bool strict_validation,
                                uint64_t workers,
                                uint64_t seed,
                                char **out);

/**
 * Releases a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `ptr` must come from this library and not be freed twice.
 */
void fwss_string_free(char *ptr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FWSS_H */
