#ifndef SPPA_C_H
#define SPPA_C_H

#include <stddef.h>

#if defined(_WIN32)
#  ifdef SPPA_BUILDING_LIBRARY
#    define SPPA_API __declspec(dllexport)
#  else
#    define SPPA_API __declspec(dllimport)
#  endif
#else
#  define SPPA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sppa_status {
  SPPA_OK = 0,
  SPPA_ERR_INVALID_ARGUMENT = 1,
  SPPA_ERR_DIMENSION = 2,
  SPPA_ERR_UNSUPPORTED = 3,
  SPPA_ERR_NUMERICAL = 4,
  SPPA_ERR_PARSE = 5,
  SPPA_ERR_IO = 6,
  SPPA_ERR_INTERNAL = 7
} sppa_status;

/* Message of the last failed call on the calling thread ("" if none). The
   pointer stays valid until the next failing call on that thread. */
SPPA_API const char* sppa_last_error(void);
SPPA_API const char* sppa_version(void);
/* Frees strings returned through char** out-parameters. */
SPPA_API void sppa_string_free(char* s);

typedef struct sppa_metric sppa_metric;
typedef struct sppa_objective sppa_objective;
typedef struct sppa_schedule sppa_schedule;
typedef struct sppa_run sppa_run;
typedef struct sppa_experiment sppa_experiment;

/* Metrics. Matrices are row-major n x n. */
SPPA_API sppa_status sppa_metric_identity(size_t n, sppa_metric** out);
SPPA_API sppa_status sppa_metric_diagonal(const double* d, size_t n, sppa_metric** out);
SPPA_API sppa_status sppa_metric_dense(const double* m, size_t n, sppa_metric** out);
SPPA_API void sppa_metric_free(sppa_metric* m);
SPPA_API sppa_status sppa_metric_apply(const sppa_metric* m, const double* v, size_t n, double* out);
SPPA_API sppa_status sppa_metric_solve(const sppa_metric* m, const double* v, size_t n, double* out);
SPPA_API sppa_status sppa_metric_norm_sq(const sppa_metric* m, const double* v, size_t n, double* out);

/* Objectives. */
SPPA_API sppa_status sppa_objective_quadratic(const double* Q, const double* b, size_t n, double c,
                                              sppa_objective** out);
SPPA_API sppa_status sppa_objective_l1(double weight, size_t n, sppa_objective** out);
/* Any objective accepted in a config's "problem" block, given as JSON text. */
SPPA_API sppa_status sppa_objective_from_json(const char* json_text, sppa_objective** out);
SPPA_API void sppa_objective_free(sppa_objective* f);
SPPA_API size_t sppa_objective_dim(const sppa_objective* f);
/* *is_infinite is set to 1 off the domain, in which case *value is untouched. */
SPPA_API sppa_status sppa_objective_value(const sppa_objective* f, const double* x, size_t n, double* value,
                                          int* is_infinite);
/* argmin f(x) + weight/2 ||x - y||^2_L; subgradient may be NULL. */
SPPA_API sppa_status sppa_objective_prox(const sppa_objective* f, const sppa_metric* m, const double* y, size_t n,
                                         double weight, double* minimizer, double* subgradient);

/* Schedules. */
SPPA_API sppa_status sppa_schedule_polynomial(int p, double d, sppa_schedule** out);
SPPA_API sppa_status sppa_schedule_exponential(double rho, double d, sppa_schedule** out);
SPPA_API sppa_status sppa_schedule_constant_ratio(double c0, double r, sppa_schedule** out);
SPPA_API sppa_status sppa_schedule_guler(const double* rhos, size_t count, sppa_schedule** out);
SPPA_API sppa_status sppa_schedule_guler_constant(double rho, sppa_schedule** out);
SPPA_API sppa_status sppa_schedule_from_json(const char* json_text, sppa_schedule** out);
SPPA_API void sppa_schedule_free(sppa_schedule* s);
/* terms = {a_k, b_k, c_k, A_k}. */
SPPA_API sppa_status sppa_schedule_terms(const sppa_schedule* s, size_t k, double terms[4]);
/* theorem is "T4", "T5" or "T6"; report may be NULL. */
SPPA_API sppa_status sppa_schedule_certify(const sppa_schedule* s, size_t horizon, const char* theorem,
                                           int* passed, char** report);

/* Solver runs. xstar may be NULL (the run is then relative). */
SPPA_API sppa_status sppa_run_ppa(const sppa_objective* f, const sppa_metric* m, double rho, const double* x0,
                                  size_t n, size_t K, const double* xstar, sppa_run** out);
SPPA_API sppa_status sppa_run_appa(const sppa_objective* f, double rho, double A, const double* x0, size_t n,
                                   size_t K, const double* xstar, sppa_run** out);
SPPA_API sppa_status sppa_run_sppa(const sppa_objective* f, const sppa_metric* m, const sppa_schedule* s,
                                   const double* x0, size_t n, size_t K, const double* xstar, sppa_run** out);
SPPA_API void sppa_run_free(sppa_run* r);
/* Number of records, K + 1. */
SPPA_API size_t sppa_run_length(const sppa_run* r);
SPPA_API size_t sppa_run_dim(const sppa_run* r);
SPPA_API sppa_status sppa_run_iterate(const sppa_run* r, size_t k, double* x);

/* Missing values are NaN. */
typedef struct sppa_trace_row {
  size_t k;
  double f_gap;
  double E;
  double E_alpha;
  double sum22_prefix;
  double sum23_prefix;
  double tilde_grad_norm_sq;
  double bound21_rhs;
  double gap_bound;
} sppa_trace_row;

SPPA_API sppa_status sppa_run_trace(const sppa_run* r, size_t k, sppa_trace_row* row);
/* The schedule is needed for SPPA runs and ignored otherwise; report may be NULL. */
SPPA_API sppa_status sppa_run_certificates(const sppa_run* r, const sppa_schedule* s, int* passed,
                                           char** report);

/* Config-driven experiments. command is "run", "compare" or "certify";
   out_dir may be NULL (then the config's output_dir, $SPPA_OUT_DIR, ./out). */
SPPA_API sppa_status sppa_experiment_execute(const char* command, const char* config_path, const char* out_dir,
                                             sppa_experiment** out);
SPPA_API void sppa_experiment_free(sppa_experiment* e);
SPPA_API int sppa_experiment_passed(const sppa_experiment* e);
SPPA_API const char* sppa_experiment_report(const sppa_experiment* e);
SPPA_API const char* sppa_experiment_output_dir(const sppa_experiment* e);

#ifdef __cplusplus
}
#endif

#endif
