#ifndef EDGESIM_H
#define EDGESIM_H

/* Generated by cbindgen from edgesim-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes mirrored into the header. `Ok` is zero; nonzero values carry
// the failure category.
typedef enum EdgesimStatus {
  EDGESIM_STATUS_OK = 0,
  EDGESIM_STATUS_NULL_ARGUMENT = 1,
  EDGESIM_STATUS_INVALID_UTF8 = 2,
  EDGESIM_STATUS_PARSE_ERROR = 3,
  EDGESIM_STATUS_CONFIG_ERROR = 4,
  EDGESIM_STATUS_RUNTIME_ERROR = 5,
} EdgesimStatus;

// Opaque simulation report handle.
typedef struct EdgesimReport EdgesimReport;

// Opaque scenario handle.
typedef struct EdgesimScenario EdgesimScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread. Never null;
// empty when nothing failed yet. Valid until the next failing call.
const char *edgesim_last_error(void);

// Library version as a static string.
const char *edgesim_version(void);

// Creates the default scenario.
//
// # Safety
// `out` must point to writable scenario-handle storage.
enum EdgesimStatus edgesim_scenario_default(struct EdgesimScenario **out);

// Parses and validates a JSON scenario document.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum EdgesimStatus edgesim_scenario_from_json(const char *json, struct EdgesimScenario **out);

// Releases a scenario handle. Null is a no-op.
//
// # Safety
// `scenario` must be a handle from this library, released once.
void edgesim_scenario_free(struct EdgesimScenario *scenario);

// Runs one policy cell on the scenario.
//
// `tsp` is one of `fcfs|edf|edd|efdf|cr|covert|era|pqm`; `rsp` is one of
// `shortest-execution|random|latest-feasible|sars`. `pora_on` (nonzero)
// reserves standby units and escalates to them (sars only). `alpha` weighs
// the time margin in the suitability score.
//
// # Safety
// `scenario`, `tsp`, `rsp` and `out` must be valid pointers.
enum EdgesimStatus edgesim_run(const struct EdgesimScenario *scenario,
                               const char *tsp,
                               const char *rsp,
                               int pora_on,
                               double alpha,
                               uint64_t seed,
                               struct EdgesimReport **out);

// Releases a report handle. Null is a no-op.
//
// # Safety
// `report` must be a handle from this library, released once.
void edgesim_report_free(struct EdgesimReport *report);

// Task completion rate of the run, in percent.
//
// # Safety
// `report` must be a valid report handle.
double edgesim_report_tcr(const struct EdgesimReport *report);

// Number of tasks processed within their deadlines.
//
// # Safety
// `report` must be a valid report handle.
unsigned int edgesim_report_processed(const struct EdgesimReport *report);

// Total number of tasks in the run.
//
// # Safety
// `report` must be a valid report handle.
unsigned int edgesim_report_total(const struct EdgesimReport *report);

// Full run metrics (completion rates, per-group rates, delay means, invalid
// counts) as a JSON document. Free with `edgesim_string_free`.
//
// # Safety
// `report` must be a valid report handle; `out` must be writable.
enum EdgesimStatus edgesim_report_metrics_json(const struct EdgesimReport *report, char **out);

// The run's event trace as newline-delimited `time,kind,task,pu` records.
// Free with `edgesim_string_free`.
//
// # Safety
// `report` must be a valid report handle; `out` must be writable.
enum EdgesimStatus edgesim_report_trace(const struct EdgesimReport *report, char **out);

// Releases a string returned by this library. Null is a no-op.
//
// # Safety
// `s` must come from this library, released once.
void edgesim_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EDGESIM_H */
