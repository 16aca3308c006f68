/* C interface to the ccx exposure engine. All functions return a ccx_status; on failure a message is available
   from ccx_last_error() on the calling thread until its next ccx call. Handles are opaque and not thread-safe. */
#ifndef CCX_H
#define CCX_H

#include <stddef.h>
#include <stdint.h>

#if defined(CCX_BUILDING_LIBRARY)
#define CCX_API __attribute__((visibility("default")))
#else
#define CCX_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ccx_status {
  CCX_OK = 0,
  CCX_ERR_INVALID_ARGUMENT = 1, /* null handle, bad buffer, inconsistent inputs */
  CCX_ERR_CONFIG = 2,           /* configuration or data validation failure */
  CCX_ERR_NUMERICAL = 3,        /* solver or estimator failure */
  CCX_ERR_IO = 4,               /* file access or format */
  CCX_ERR_INTERNAL = 5
} ccx_status;

typedef struct ccx_config ccx_config;
typedef struct ccx_run ccx_run;

CCX_API const char* ccx_version(void);
CCX_API const char* ccx_last_error(void);

/* Run configuration: key/value pairs using the command-line spellings (e.g. "case", "method", "grid-points",
   "time-steps", "dates", "paths", "mc-steps", "seed", "base-factor", "cv", "shared-paths", "option-pricer",
   "regression-paths", "threads", "prune", "out", "dump-surfaces", "dump-stride", "reference", "data-dir",
   "model", "portfolio"). */
CCX_API ccx_status ccx_config_create(ccx_config** out);
CCX_API void ccx_config_destroy(ccx_config* cfg);
CCX_API ccx_status ccx_config_set(ccx_config* cfg, const char* key, const char* value);
CCX_API ccx_status ccx_config_validate(const ccx_config* cfg);

/* Copies a NUL-terminated string into buf. *needed (if not null) receives the full length including the NUL;
   a buffer that is too small yields CCX_ERR_INVALID_ARGUMENT and leaves buf untouched. */
CCX_API ccx_status ccx_explain_plan(const ccx_config* cfg, char* buf, size_t capacity, size_t* needed);

/* Executes the configured run; the handle owns the resulting profile and diagnostics. */
CCX_API ccx_status ccx_run_execute(const ccx_config* cfg, ccx_run** out);
CCX_API void ccx_run_destroy(ccx_run* run);

/* Number of exposure dates (including t = 0). */
CCX_API ccx_status ccx_run_size(const ccx_run* run, size_t* n);
/* Column by name: "t", "EE", "EPE", "ENE", "SE_EE", "SE_EPE" (SE columns for sampled methods only). */
CCX_API ccx_status ccx_run_column(const ccx_run* run, const char* name, double* out, size_t capacity);
/* Scalars: "notional_total", "reduction_ee", "reduction_epe" (control-variate runs), "seconds". */
CCX_API ccx_status ccx_run_scalar(const ccx_run* run, const char* name, double* out);
/* profile.csv, summary.txt and the method's other artifacts into dir (created if needed). */
CCX_API ccx_status ccx_run_write(const ccx_run* run, const char* dir);

/* Error metrics in percent (e_l2, e_linf, se) or basis points (md) for arrays of length n. */
CCX_API ccx_status ccx_metric_e_l2(const double* candidate, const double* reference, size_t n, double* out);
CCX_API ccx_status ccx_metric_e_linf(const double* candidate, const double* reference, size_t n, double* out);
CCX_API ccx_status ccx_metric_mean_difference(const double* candidate, const double* reference, const double* times,
                                              size_t n, double notional_total, double* out);
CCX_API ccx_status ccx_metric_se(const double* se, const double* reference, size_t n, double* out);

/* errors.csv of a candidate profile.csv against a reference profile.csv. */
CCX_API ccx_status ccx_compare_files(const char* candidate, const char* reference, double notional_total,
                                     const char* case_name, const char* method, const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif
