/* stldec - decomposition of global signal temporal logic tasks over agent
 * teams into per-team local tasks, with robustness checking and simulation.
 *
 * C interface over the core library: opaque handles, integer status codes,
 * malloc'd strings released through stldec_string_free. All functions are
 * thread-safe as long as each handle is used from one thread at a time;
 * the error message store is thread-local.
 */
#ifndef STLDEC_H
#define STLDEC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define STLDEC_API __declspec(dllexport)
#else
#define STLDEC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum stldec_status {
  STLDEC_OK = 0,
  STLDEC_ERR_INPUT = 1,      /* malformed scenario/formula/trajectory */
  STLDEC_ERR_INFEASIBLE = 2, /* empty level set, unreachable deadline */
  STLDEC_ERR_VIOLATION = 3,  /* a checked property does not hold */
  STLDEC_ERR_INTERNAL = 4
} stldec_status;

typedef struct stldec_scenario stldec_scenario;
typedef struct stldec_tasks stldec_tasks;   /* decomposition + local tasks */
typedef struct stldec_report stldec_report; /* simulation/robustness report */

typedef struct stldec_options {
  int timing_mode;     /* 0 = point eventually, 1 = interval always, -1 = scenario default */
  double margin;       /* radius shrink for strict satisfaction; < 0 = scenario default */
  uint64_t seed;       /* randomized runs */
  int oracle_check;    /* nonzero: cross-check small programs against the grid oracle */
  int log_level;       /* 0 = error, 1 = info, 2 = debug */
} stldec_options;

STLDEC_API const char* stldec_version(void);
STLDEC_API const char* stldec_status_name(stldec_status status);

/* Message describing the most recent failure on this thread. */
STLDEC_API const char* stldec_last_error(void);

STLDEC_API void stldec_options_defaults(stldec_options* opts);

/* -- scenarios ----------------------------------------------------------- */
STLDEC_API stldec_status stldec_scenario_load_file(const char* path,
                                                   stldec_scenario** out);
STLDEC_API stldec_status stldec_scenario_load_string(const char* json_text,
                                                     stldec_scenario** out);
STLDEC_API void stldec_scenario_free(stldec_scenario* s);

/* -- decomposition ------------------------------------------------------- */
STLDEC_API stldec_status stldec_decompose(const stldec_scenario* s,
                                          const stldec_options* opts,
                                          stldec_tasks** out);
STLDEC_API stldec_status stldec_tasks_load_file(const char* path, stldec_tasks** out);
STLDEC_API stldec_status stldec_tasks_load_string(const char* json_text,
                                                  stldec_tasks** out);
STLDEC_API stldec_status stldec_tasks_to_json(const stldec_tasks* t, char** out);
STLDEC_API void stldec_tasks_free(stldec_tasks* t);

/* -- simulation ---------------------------------------------------------- */
STLDEC_API stldec_status stldec_simulate(const stldec_scenario* s,
                                         const stldec_options* opts,
                                         stldec_report** out);
STLDEC_API stldec_status stldec_report_to_json(const stldec_report* r, char** out);
STLDEC_API int stldec_report_team_count(const stldec_report* r);
STLDEC_API int stldec_report_all_planned(const stldec_report* r);
/* Local robustness of one team; meaningful only when planning succeeded. */
STLDEC_API double stldec_report_local_robustness(const stldec_report* r, int team);
STLDEC_API double stldec_report_global_robustness(const stldec_report* r);
STLDEC_API int stldec_report_soundness_violation(const stldec_report* r);
/* team >= 0 for a team signal, -1 for the stitched global signal. */
STLDEC_API stldec_status stldec_report_trajectory_csv(const stldec_report* r,
                                                      int team, char** out);
STLDEC_API stldec_status stldec_report_boxes_csv(const stldec_report* r, char** out);
STLDEC_API stldec_status stldec_report_traces_csv(const stldec_report* r, char** out);
/* The tasks bundle produced during the run. */
STLDEC_API stldec_status stldec_report_tasks_json(const stldec_report* r, char** out);
STLDEC_API void stldec_report_free(stldec_report* r);

/* -- checking ------------------------------------------------------------ */
/* Evaluates a stored tasks bundle against a trajectory in CSV form
 * (t,x1,...,xn). Returns STLDEC_OK when every local robustness is positive,
 * STLDEC_ERR_VIOLATION otherwise; the JSON report is produced either way. */
STLDEC_API stldec_status stldec_check_csv(const stldec_tasks* t, const char* csv_text,
                                          char** out_report_json,
                                          double* out_global_robustness,
                                          double* out_min_local_robustness);

/* -- randomized soundness run -------------------------------------------- */
/* Runs `count` random scenarios; STLDEC_ERR_VIOLATION if any planned run
 * with positive local robustness fails globally. Summary JSON is optional. */
STLDEC_API stldec_status stldec_fuzz(const stldec_options* opts, int count,
                                     char** out_summary_json);

/* Releases strings returned by the *_json / *_csv functions. */
STLDEC_API void stldec_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* STLDEC_H */
