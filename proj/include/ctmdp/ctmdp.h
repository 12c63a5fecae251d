#ifndef CTMDP_CTMDP_H
#define CTMDP_CTMDP_H

/*
 * C interface to the finite-horizon CTMDP library.
 *
 * Handles are opaque and owned by the caller; release them with the matching
 * *_free function. Every call returns a ctmdp_status; on failure the message
 * is available from ctmdp_last_error() on the same thread. Strings returned
 * through char** outputs are heap-allocated and released with ctmdp_string_free.
 * States are 1-based; action indices are 0-based.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(CTMDP_BUILDING_LIBRARY)
#define CTMDP_API __attribute__((visibility("default")))
#else
#define CTMDP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ctmdp_status {
  CTMDP_OK = 0,
  CTMDP_MALFORMED_MODEL = 1,
  CTMDP_INDEX_OUT_OF_RANGE = 2,
  CTMDP_GRID_MISMATCH = 3,
  CTMDP_STABILITY_VIOLATION = 4,
  CTMDP_NON_FINITE_VALUE = 5,
  CTMDP_TIME_OUT_OF_RANGE = 6,
  CTMDP_INVALID_ENVELOPE = 7,
  CTMDP_MISSING_LYAPUNOV = 8,
  CTMDP_COMPLEXITY_BUDGET_EXCEEDED = 9,
  CTMDP_INVALID_ARGUMENT = 10,
  CTMDP_PARSE_ERROR = 11,
  CTMDP_IO_ERROR = 12,
  CTMDP_INTERNAL_ERROR = 13
} ctmdp_status;

typedef struct ctmdp_model ctmdp_model;
typedef struct ctmdp_value ctmdp_value;
typedef struct ctmdp_policy ctmdp_policy;

typedef struct ctmdp_estimate {
  double mean;
  double std_error;
  uint64_t n_paths;
  uint64_t seed;
} ctmdp_estimate;

CTMDP_API const char* ctmdp_last_error(void);
CTMDP_API const char* ctmdp_status_name(ctmdp_status status);
CTMDP_API void ctmdp_string_free(char* s);

/* Models */
CTMDP_API ctmdp_status ctmdp_model_load(const char* path, ctmdp_model** out);
CTMDP_API ctmdp_status ctmdp_model_from_json(const char* json, ctmdp_model** out);
/* Bundled admission-control chain with n_states states (10 for the full model). */
CTMDP_API ctmdp_status ctmdp_model_demo(int n_states, ctmdp_model** out);
CTMDP_API ctmdp_status ctmdp_model_to_json(const ctmdp_model* model, char** json);
CTMDP_API ctmdp_status ctmdp_model_n_states(const ctmdp_model* model, int* n_states);
CTMDP_API ctmdp_status ctmdp_model_rate_bound(const ctmdp_model* model, double* m);
/* Assumption report as JSON; *all_pass tells whether H1-H3 and the cost bounds hold. */
CTMDP_API ctmdp_status ctmdp_model_validate(const ctmdp_model* model, int* all_pass, char** report_json);
CTMDP_API void ctmdp_model_free(ctmdp_model* model);

/* Value functions. scheme is "euler" or "rk4". */
CTMDP_API ctmdp_status ctmdp_solve(const ctmdp_model* model, double dt, const char* scheme, ctmdp_value** out);
CTMDP_API ctmdp_status ctmdp_value_at(const ctmdp_value* value, double t, int state, double* v);
CTMDP_API ctmdp_status ctmdp_value_node(const ctmdp_value* value, size_t node, int state, double* v, int* argmin);
CTMDP_API ctmdp_status ctmdp_value_dims(const ctmdp_value* value, size_t* n_nodes, int* n_states, double* dt);
CTMDP_API ctmdp_status ctmdp_value_to_csv(const ctmdp_value* value, char** csv);
CTMDP_API ctmdp_status ctmdp_value_residual(const ctmdp_model* model, const ctmdp_value* value, double* residual);
CTMDP_API void ctmdp_value_free(ctmdp_value* value);

/* Policies */
CTMDP_API ctmdp_status ctmdp_policy_load(const ctmdp_model* model, const char* path, ctmdp_policy** out);
CTMDP_API ctmdp_status ctmdp_policy_from_json(const ctmdp_model* model, const char* json, ctmdp_policy** out);
CTMDP_API ctmdp_status ctmdp_policy_feedback(const ctmdp_model* model, const ctmdp_value* value, ctmdp_policy** out);
CTMDP_API ctmdp_status ctmdp_policy_to_json(const ctmdp_model* model, const ctmdp_policy* policy, char** json);
CTMDP_API void ctmdp_policy_free(ctmdp_policy* policy);

/* Simulation. s is the start time, state the 1-based start state. */
CTMDP_API ctmdp_status ctmdp_estimate_cost(const ctmdp_model* model, const ctmdp_policy* policy, double s, int state,
                                           uint64_t n_paths, uint64_t seed, ctmdp_estimate* out);
CTMDP_API ctmdp_status ctmdp_estimate_to_csv(const ctmdp_estimate* estimate, char** csv);
CTMDP_API ctmdp_status ctmdp_dump_trajectories(const ctmdp_model* model, const ctmdp_policy* policy, double s,
                                               int state, uint64_t n_paths, uint64_t seed, char** csv);

/*
 * Verification experiments: "dpp" (both stopping rules), "dpp-deterministic",
 * "dpp-first-jump", "lipschitz", "delay-no-gain", "oracle". The value function
 * is solved internally with step dt and the given scheme. n_paths is the Monte
 * Carlo size per policy. The report is a JSON document.
 */
CTMDP_API ctmdp_status ctmdp_verify(const ctmdp_model* model, const char* experiment, double dt, const char* scheme,
                                    uint64_t n_paths, uint64_t seed, double s, int state, int* passed,
                                    char** report_json);

#ifdef __cplusplus
}
#endif

#endif
