#ifndef QLMASS_H
#define QLMASS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. The first four match the command-line exit codes.
typedef enum qlm_status {
  QLM_STATUS_OK = 0,
  // An asserted inequality failed beyond its slack.
  QLM_STATUS_VIOLATION = 1,
  // Malformed input or data outside the operation's domain.
  QLM_STATUS_INPUT = 2,
  // A solver did not converge.
  QLM_STATUS_NONCONVERGENCE = 3,
  // A required pointer argument was null.
  QLM_STATUS_NULL_ARGUMENT = 4,
  // The report does not hold the requested value because an earlier
  // stage failed.
  QLM_STATUS_UNAVAILABLE = 5,
  // The library panicked; the handle arguments are left untouched.
  QLM_STATUS_INTERNAL = 6,
} qlm_status;

// Opaque handle to a pipeline run: the report and, when the flow ran, its
// CSV table.
typedef struct qlm_report qlm_report;

// Opaque scenario handle.
typedef struct qlm_scenario qlm_scenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *qlm_version(void);

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next library call on the same thread.
const char *qlm_last_error(void);

// Parses a scenario from JSON text.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum qlm_status qlm_scenario_from_json(const char *json, struct qlm_scenario **out);

// Reads a scenario file; a data file it names is resolved relative to it.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum qlm_status qlm_scenario_load(const char *path, struct qlm_scenario **out);

// Overrides the seed of a perturbed data preset.
//
// # Safety
// `scenario` must come from this library and not yet be freed.
enum qlm_status qlm_scenario_set_seed(struct qlm_scenario *scenario, uint64_t seed);

// # Safety
// `scenario` must be null or come from this library and not yet be freed.
void qlm_scenario_free(struct qlm_scenario *scenario);

// Runs the pipeline. A report handle is produced even when a stage fails;
// the return value is then that failure's status and the report records
// the stage.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum qlm_status qlm_run_pipeline(const struct qlm_scenario *scenario, struct qlm_report **out);

// Command-line exit code of the run, or -1 for a null handle.
//
// # Safety
// `report` must be null or a live handle.
int32_t qlm_report_exit_code(const struct qlm_report *report);

// Quasi-local energy `E` of the boundary.
//
// # Safety
// `report` must be a live handle and `out` a valid pointer.
enum qlm_status qlm_report_energy(const struct qlm_report *report, double *out);

// Mass aspect `m(0)` at the start of the flow.
//
// # Safety
// `report` must be a live handle and `out` a valid pointer.
enum qlm_status qlm_report_m0(const struct qlm_report *report, double *out);

// Limit `m_∞` of the mass aspect.
//
// # Safety
// `report` must be a live handle and `out` a valid pointer.
enum qlm_status qlm_report_m_inf(const struct qlm_report *report, double *out);

// Report as pretty-printed JSON; release with [`qlm_string_free`].
//
// # Safety
// `report` must be null or a live handle.
char *qlm_report_json(const struct qlm_report *report);

// Flow table as CSV, or null if the flow did not run; release with
// [`qlm_string_free`].
//
// # Safety
// `report` must be null or a live handle.
char *qlm_report_flow_csv(const struct qlm_report *report);

// # Safety
// `report` must be null or come from this library and not yet be freed.
void qlm_report_free(struct qlm_report *report);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void qlm_string_free(char *s);

// Energy `r(1 - √(1 - 2M/r))/G` of the round sphere of areal radius `r`
// in the Schwarzschild slice of mass `M`.
//
// # Safety
// `out` must be a valid pointer.
enum qlm_status qlm_schwarzschild_mass(double mass, double r, double gravity, double *out);

// Margin `(H - c4 P)/c3 - √max(H² - P², 0)` of the pointwise boundary
// inequality, with `c4 = ±√(1 - c3²)` signed by `sign`.
//
// # Safety
// `out` must be a valid pointer.
enum qlm_status qlm_boundary_margin(double h, double p, double c3, double sign, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QLMASS_H */
