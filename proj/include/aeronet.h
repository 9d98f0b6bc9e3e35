/*
 * aeronet — deterministic multi-drone airborne networking emulator.
 *
 * C API over the simulation core: load and validate benchmark scenarios, run
 * them to produce an event log and a metrics report, recompute metrics from
 * a persisted log, and stream log records for replay.
 *
 * Conventions:
 *   - Every function returns an aeronet_status; AERONET_OK is 0.
 *   - On failure, aeronet_last_error() returns a thread-local message (for
 *     validation failures: the complete violation list, one per line).
 *   - Objects are opaque handles released with their _free function.
 *   - Strings returned through char** are heap-allocated; release them with
 *     aeronet_string_free().
 */
#ifndef AERONET_H
#define AERONET_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aeronet_status {
  AERONET_OK = 0,
  AERONET_EINVAL = 1,  /* bad input: validation failure, malformed log */
  AERONET_EIO = 2,     /* file not readable/writable */
  AERONET_ERUNTIME = 3 /* simulation aborted */
} aeronet_status;

typedef struct aeronet_scenario aeronet_scenario;
typedef struct aeronet_report aeronet_report;

const char* aeronet_version(void);
/* Thread-local message describing the most recent failure. */
const char* aeronet_last_error(void);
void aeronet_string_free(char* s);

/* Scenario loading. On AERONET_EINVAL the error message lists every
 * violation found, one per line. */
aeronet_status aeronet_scenario_load(const char* path, aeronet_scenario** out);
aeronet_status aeronet_scenario_load_json(const char* text, aeronet_scenario** out);
void aeronet_scenario_free(aeronet_scenario* scenario);
uint64_t aeronet_scenario_seed(const aeronet_scenario* scenario);
const char* aeronet_scenario_name(const aeronet_scenario* scenario);

/* Runs the scenario. seed_override may be NULL to use the scenario's seed.
 * events_path may be NULL to skip persisting the log. */
aeronet_status aeronet_run(const aeronet_scenario* scenario, const uint64_t* seed_override,
                           const char* events_path, aeronet_report** out);

/* Recomputes the report from a persisted event log. */
aeronet_status aeronet_report_from_log(const char* events_path, aeronet_report** out);
void aeronet_report_free(aeronet_report* report);

/* Canonical metrics document (byte-stable for identical logs). */
aeronet_status aeronet_report_render(const aeronet_report* report, char** out);
/* One-screen human summary. */
aeronet_status aeronet_report_summary(const aeronet_report* report, char** out);

/* Streams log records as text lines; category_filter may be NULL or one of
 * gps, mavlink, packet, radio, mode, mission, error. */
typedef void (*aeronet_line_cb)(void* user, const char* line);
aeronet_status aeronet_replay(const char* events_path, const char* category_filter,
                              aeronet_line_cb cb, void* user);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* AERONET_H */
