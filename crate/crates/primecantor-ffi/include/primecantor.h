#ifndef PRIMECANTOR_H
#define PRIMECANTOR_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum PcStatus {
  PcStatus_Ok = 0,
  PcStatus_InvalidArgument = 1,
  PcStatus_OutOfRange = 2,
  PcStatus_NumericFailure = 3,
  PcStatus_ResourceCap = 4,
  PcStatus_InternalError = 5,
} PcStatus;

/**
 * Opaque sieve handle.
 */
typedef struct PcPrimeTable PcPrimeTable;

/**
 * One windowed gap record.
 */
typedef struct PcGapRecord {
  uint64_t n;
  uint64_t p_n;
  uint64_t d_n;
  uint64_t window_min;
  double normalized;
} PcGapRecord;

/**
 * Conformal-dimension result with its bisection bracket.
 */
typedef struct PcDeltaResult {
  double delta;
  double lower;
  double upper;
  double tail_bound;
} PcDeltaResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *pc_version(void);

/**
 * Message for the most recent failure on this thread; NULL when none.
 * The pointer is valid until the next failing call on the same thread.
 */
const char *pc_last_error_message(void);

/**
 * Sieve the primes in [2, limit] into a new table.
 *
 * # Safety
 * `out` must point to writable storage for one pointer.
 */
enum PcStatus pc_sieve(uint64_t limit, struct PcPrimeTable **out);

/**
 * Release a table created by `pc_sieve`. NULL is a no-op.
 *
 * # Safety
 * `table` must be a pointer returned by `pc_sieve` that has not been freed.
 */
void pc_prime_table_free(struct PcPrimeTable *table);

/**
 * Number of primes in the table (π of the limit).
 *
 * # Safety
 * `table` must be a live handle from `pc_sieve`; `out` must be writable.
 */
enum PcStatus pc_prime_count(const struct PcPrimeTable *table, uint64_t *out);

/**
 * Count of primes ≤ x.
 *
 * # Safety
 * As `pc_prime_count`.
 */
enum PcStatus pc_prime_rank(const struct PcPrimeTable *table, uint64_t x, uint64_t *out);

/**
 * i-th prime, 1-based.
 *
 * # Safety
 * As `pc_prime_count`.
 */
enum PcStatus pc_prime_select(const struct PcPrimeTable *table, uint64_t i, uint64_t *out);

/**
 * #{p prime : |p − a| ≤ x}, closed ball.
 *
 * # Safety
 * As `pc_prime_count`.
 */
enum PcStatus pc_window_count(const struct PcPrimeTable *table,
                              uint64_t a,
                              double x,
                              uint64_t *out);

/**
 * Final running-maximum record of min(d_n,…,d_{n+k−1})/ln²(p_n) over the
 * table, starting at prime index `start_n` (0 selects the default start).
 *
 * # Safety
 * As `pc_prime_count`; `out` must point to a writable `PcGapRecord`.
 */
enum PcStatus pc_rk_final(const struct PcPrimeTable *table,
                          uint32_t k,
                          uint64_t start_n,
                          struct PcGapRecord *out);

/**
 * Final record on one random-model sample (seeded, reproducible).
 *
 * # Safety
 * `out` must point to a writable `PcGapRecord`.
 */
enum PcStatus pc_cramer_rk_final(uint64_t limit,
                                 uint64_t seed,
                                 uint32_t k,
                                 struct PcGapRecord *out);

/**
 * Conformal dimension of the prime alphabet truncated at `trunc`, bisected
 * to `tol`.
 *
 * # Safety
 * `out` must point to a writable `PcDeltaResult`.
 */
enum PcStatus pc_delta_primes(uint64_t trunc, double tol, struct PcDeltaResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRIMECANTOR_H */
