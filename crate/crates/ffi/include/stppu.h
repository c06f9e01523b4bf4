#ifndef STPPU_H
#define STPPU_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum StppuStatus {
  STPPU_STATUS_OK = 0,
  /**
   * The call worked but the property does not hold.
   */
  STPPU_STATUS_NOT_CONTROLLABLE = 1,
  STPPU_STATUS_INVALID_INPUT = 2,
  STPPU_STATUS_INCONCLUSIVE = 3,
  /**
   * An internal panic was caught.
   */
  STPPU_STATUS_PANIC = 4,
} StppuStatus;

typedef enum StppuProperty {
  STPPU_PROPERTY_OSC = 0,
  STPPU_PROPERTY_OWC = 1,
  STPPU_PROPERTY_ODC = 2,
} StppuProperty;

/**
 * A parsed problem.
 */
typedef struct StppuProblem StppuProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses problem text into a new handle stored in `*out`.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` a writable pointer.
 */
enum StppuStatus stppu_problem_parse(const char *src, struct StppuProblem **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `p` must be null or a handle from `stppu_problem_parse` not yet freed.
 */
void stppu_problem_free(struct StppuProblem *p);

/**
 * Number of time-points in the problem, or -1 for a null handle.
 *
 * # Safety
 * `p` must be null or a live handle.
 */
int64_t stppu_problem_len(const struct StppuProblem *p);

/**
 * Checks a property and stores the report JSON in `*out_json`.
 * Returns `NotControllable` when the optimal property does not hold.
 *
 * # Safety
 * `p` must be a live handle and `out_json` writable.
 */
enum StppuStatus stppu_check(const struct StppuProblem *p,
                             enum StppuProperty property,
                             char **out_json);

/**
 * Best level with uncertainty ignored, as JSON.
 *
 * # Safety
 * `p` must be a live handle and `out_json` writable.
 */
enum StppuStatus stppu_solve(const struct StppuProblem *p, char **out_json);

/**
 * Executes the dynamic strategy against a nature script
 * (`observe <name> <duration>` lines) and stores the outcome JSON.
 *
 * # Safety
 * `p` must be a live handle, `nature` a NUL-terminated string and
 * `out_json` writable.
 */
enum StppuStatus stppu_execute_scripted(const struct StppuProblem *p,
                                        const char *nature,
                                        char **out_json);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void stppu_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null.
 * Valid until the next call into the library on this thread.
 */
const char *stppu_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STPPU_H */
