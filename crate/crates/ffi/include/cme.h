#ifndef CME_H
#define CME_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CmeAnswer {
  /**
   * The test mass is below the unknown mass.
   */
  CME_ANSWER_LESSER = 0,
  CME_ANSWER_GREATER = 1,
  CME_ANSWER_TIMEOUT = 2,
} CmeAnswer;

typedef enum CmeStatus {
  CME_STATUS_OK = 0,
  CME_STATUS_NULL_ARGUMENT = 1,
  CME_STATUS_INVALID_UTF8 = 2,
  /**
   * A mass, schedule, word or number did not parse.
   */
  CME_STATUS_PARSE = 3,
  /**
   * The oracle configuration was rejected.
   */
  CME_STATUS_CONFIG = 4,
  /**
   * The oracle or a procedure failed while running.
   */
  CME_STATUS_ORACLE = 5,
  CME_STATUS_PANIC = 6,
} CmeStatus;

/**
 * An unknown mass.
 */
typedef struct CmeMass CmeMass;

/**
 * An oracle with its query transcript.
 */
typedef struct CmeOracle CmeOracle;

/**
 * A time schedule together with the oracle constant it was parsed against.
 */
typedef struct CmeSchedule CmeSchedule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; do not free.
 */
const char *cme_version(void);

/**
 * Copy of the last error message on this thread, or NULL if none. Free with
 * [`cme_string_free`].
 */
char *cme_last_error(void);

void cme_clear_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void cme_string_free(char *s);

/**
 * Parse a schedule such as `exp:k=2` or `const:64`. `k_const` is the oracle
 * constant as an exact number (`"1"`, `"3/2"`, `"2^4"`); NULL means 1.
 *
 * # Safety
 * String arguments must be NULL or NUL-terminated; `out` must be writable.
 */
enum CmeStatus cme_schedule_parse(const char *spec, const char *k_const, struct CmeSchedule **out);

/**
 * `T(n)` as an exact rational string.
 *
 * # Safety
 * `schedule` must be a live handle and `out` writable.
 */
enum CmeStatus cme_schedule_evaluate(const struct CmeSchedule *schedule, uint64_t n, char **out);

/**
 * # Safety
 * `schedule` must be NULL or a handle from [`cme_schedule_parse`] not yet freed.
 */
void cme_schedule_free(struct CmeSchedule *schedule);

/**
 * Parse a mass such as `rational:1/3` or `sqrt:2`. Masses derived from a
 * schedule (`adversarial:from-schedule`) use `schedule`; NULL means
 * `exp:k=2` with constant 1.
 *
 * # Safety
 * `spec` must be NUL-terminated, `schedule` NULL or live, `out` writable.
 */
enum CmeStatus cme_mass_parse(const char *spec,
                              const struct CmeSchedule *schedule,
                              struct CmeMass **out);

/**
 * The first `n` canonical binary digits as a string of `0` and `1`.
 *
 * # Safety
 * `mass` must be live and `out` writable.
 */
enum CmeStatus cme_mass_digits(const struct CmeMass *mass, uint64_t n, char **out);

/**
 * # Safety
 * `mass` must be NULL or a handle from [`cme_mass_parse`] not yet freed.
 */
void cme_mass_free(struct CmeMass *mass);

/**
 * Build an oracle over `mass` from a TOML configuration (keys `K`, `N`,
 * `mode`, `epsilon`, `seed`, ...); NULL gives the error-free defaults. The
 * mass handle stays owned by the caller.
 *
 * # Safety
 * `mass` must be live, `config_toml` NULL or NUL-terminated, `out` writable.
 */
enum CmeStatus cme_oracle_new(const struct CmeMass *mass,
                              const char *config_toml,
                              struct CmeOracle **out);

/**
 * One query: set the test mass to the dyadic named by `word` (`"011"` is
 * 3/8) and wait at most `budget`. `elapsed_out` may be NULL.
 *
 * # Safety
 * `oracle` must be live, strings NUL-terminated, `answer_out` writable.
 */
enum CmeStatus cme_oracle_query(struct CmeOracle *oracle,
                                const char *word,
                                const char *budget,
                                enum CmeAnswer *answer_out,
                                char **elapsed_out);

/**
 * Bisection for `n` digits under `schedule`. `digits_out` receives the
 * digits read; `timed_out_at` receives the digit that timed out, or 0 when
 * all `n` were read.
 *
 * # Safety
 * Handles must be live and both outputs writable.
 */
enum CmeStatus cme_oracle_bisection(struct CmeOracle *oracle,
                                    const struct CmeSchedule *schedule,
                                    uint64_t n,
                                    char **digits_out,
                                    uint64_t *timed_out_at);

/**
 * Total simulated experiment time so far, as an exact rational string.
 *
 * # Safety
 * `oracle` must be live and `out` writable.
 */
enum CmeStatus cme_oracle_total_time(const struct CmeOracle *oracle, char **out);

/**
 * The transcript as JSON lines, one query per line.
 *
 * # Safety
 * `oracle` must be live and `out` writable.
 */
enum CmeStatus cme_oracle_transcript(const struct CmeOracle *oracle, char **out);

/**
 * # Safety
 * `oracle` must be NULL or a handle from [`cme_oracle_new`] not yet freed.
 */
void cme_oracle_free(struct CmeOracle *oracle);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CME_H */
