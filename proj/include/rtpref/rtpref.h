#ifndef RTPREF_H
#define RTPREF_H

/* C interface to the rtpref library. Every function returns a status code;
 * on failure rtpref_last_error() describes the problem (per thread). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RTPREF_API __declspec(dllexport)
#else
#define RTPREF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rtpref_status {
  RTPREF_OK = 0,
  RTPREF_ERR_VALIDATION = 1,
  RTPREF_ERR_NUMERICAL = 2,
  RTPREF_ERR_INTERNAL = 3
} rtpref_status;

typedef struct rtpref_dataset rtpref_dataset;

RTPREF_API const char* rtpref_last_error(void);
RTPREF_API const char* rtpref_version(void);

/* Datasets. x and y are row-major n x d; z holds -1/+1; t > 0. */
RTPREF_API rtpref_status rtpref_dataset_create(size_t n, size_t d, const double* x, const double* y, const int* z,
                                               const double* t, rtpref_dataset** out);
RTPREF_API rtpref_status rtpref_dataset_load_csv(const char* path, const char* agent_id, rtpref_dataset** out);
RTPREF_API rtpref_status rtpref_dataset_shape(const rtpref_dataset* ds, size_t* n, size_t* d);
RTPREF_API void rtpref_dataset_free(rtpref_dataset* ds);

/* DDM closed forms. */
RTPREF_API rtpref_status rtpref_ddm_moments(double v, double b, double* choice_mean, double* mean_t,
                                            double* second_moment_t);
RTPREF_API rtpref_status rtpref_ddm_choice_prob(double v, double b, int z, double* out);
RTPREF_API rtpref_status rtpref_ddm_laplace(double alpha, double v, double b, double* out);
RTPREF_API rtpref_status rtpref_ddm_density(double t, double v, double b, double tol, double* out);

/* Lognormal race closed forms. */
RTPREF_API rtpref_status rtpref_lnr_moments(double nu_x, double nu_y, double d0, double rho, double* choice_mean,
                                            double* mean_t);

/* Exact DDM draws: n pairs (z[i], t[i]) from one seed. */
RTPREF_API rtpref_status rtpref_ddm_sample(double v, double b, uint64_t seed, size_t n, int* z, double* t);

/* Estimators. Output vectors must hold d doubles. lambda <= 0 selects the default step. */
RTPREF_API rtpref_status rtpref_fit_ddm_sgd(const rtpref_dataset* ds, double lambda, double* u_out);
RTPREF_API rtpref_status rtpref_fit_ddm_exact(const rtpref_dataset* ds, double* u_out);
RTPREF_API rtpref_status rtpref_fit_logistic(const rtpref_dataset* ds, double reg, double* m_out);
RTPREF_API rtpref_status rtpref_recover_b_combine(size_t d, const double* u, const double* m, double* b_out);
RTPREF_API rtpref_status rtpref_recover_b_moment_match(const rtpref_dataset* ds, const double* u, double* b_out);

/* Commands. config_path and overrides_json (a JSON object applied after the
 * file) may be NULL. *output receives text to print; free it with
 * rtpref_string_free. It is also set on failure when a report exists. */
RTPREF_API rtpref_status rtpref_cmd_simulate(const char* config_path, const char* overrides_json, char** output);
RTPREF_API rtpref_status rtpref_cmd_fit(const char* config_path, const char* overrides_json, char** output);
RTPREF_API rtpref_status rtpref_cmd_evaluate(const char* config_path, const char* overrides_json, char** output);
RTPREF_API rtpref_status rtpref_cmd_identity_check(const char* config_path, const char* overrides_json,
                                                   char** output);
RTPREF_API void rtpref_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* RTPREF_H */
