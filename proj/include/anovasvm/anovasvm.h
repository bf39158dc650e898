#ifndef ANOVASVM_H
#define ANOVASVM_H

/* C interface of the anovasvm library. All handles are opaque; every call
 * that can fail returns an asvm_status and leaves a message for
 * asvm_last_error() on the calling thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef ASVM_BUILDING_LIBRARY
#    define ASVM_API __declspec(dllexport)
#  else
#    define ASVM_API __declspec(dllimport)
#  endif
#else
#  define ASVM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum asvm_status {
  ASVM_OK = 0,
  ASVM_INVALID_ARGUMENT = 1,
  ASVM_NOT_FOUND = 2,
  ASVM_DOMAIN_ERROR = 3,
  ASVM_INDEX_ERROR = 4,
  ASVM_PARSE_ERROR = 5,
  ASVM_NUMERIC_FAILURE = 6,
  ASVM_STEP_FAILURE = 7,
  ASVM_FORMAT_ERROR = 8,
  ASVM_CONFIG_ERROR = 9,
  ASVM_IO_ERROR = 10,
  ASVM_INTERNAL_ERROR = 11
} asvm_status;

typedef enum asvm_log_level { ASVM_LOG_INFO = 0, ASVM_LOG_WARNING = 1 } asvm_log_level;

typedef struct asvm_config asvm_config;
typedef struct asvm_dataset asvm_dataset;
typedef struct asvm_model asvm_model;
typedef struct asvm_gsi_report asvm_gsi_report;

typedef void (*asvm_log_fn)(asvm_log_level level, const char* message, void* user);

ASVM_API const char* asvm_version(void);
ASVM_API const char* asvm_status_name(asvm_status status);
/* Process exit code for a status: 0 ok, 2 configuration or input errors,
 * 3 numeric failures, 4 I/O errors, 1 anything else. */
ASVM_API int asvm_exit_code(asvm_status status);
/* Message of the last failing call on this thread ("" if none). */
ASVM_API const char* asvm_last_error(void);
/* NULL restores the default sink (stderr). */
ASVM_API void asvm_set_log_callback(asvm_log_fn fn, void* user);

/* run configuration: keys are the long CLI flag names */
ASVM_API asvm_status asvm_config_create(asvm_config** out);
ASVM_API void asvm_config_destroy(asvm_config* config);
ASVM_API asvm_status asvm_config_set(asvm_config* config, const char* key, const char* value);
ASVM_API asvm_status asvm_config_load(asvm_config* config, const char* path);
ASVM_API asvm_status asvm_config_validate(const asvm_config* config);

/* subcommands; tabular output goes to stdout unless the config sets "out" */
ASVM_API asvm_status asvm_cmd_fit(const asvm_config* config);
ASVM_API asvm_status asvm_cmd_predict(const asvm_config* config);
ASVM_API asvm_status asvm_cmd_gsi(const asvm_config* config);
ASVM_API asvm_status asvm_cmd_refine(const asvm_config* config);
ASVM_API asvm_status asvm_cmd_bench(const asvm_config* config);
ASVM_API asvm_status asvm_cmd_synth(const asvm_config* config);

/* datasets: labels are stored as -1/+1 */
ASVM_API asvm_status asvm_dataset_read(const char* path, const asvm_config* config, asvm_dataset** out);
/* X is row-major rows x cols; labels are -1/+1 or 0/1 */
ASVM_API asvm_status asvm_dataset_from_arrays(const double* X, const double* labels, size_t rows, size_t cols,
                                              asvm_dataset** out);
ASVM_API void asvm_dataset_destroy(asvm_dataset* data);
ASVM_API size_t asvm_dataset_rows(const asvm_dataset* data);
ASVM_API size_t asvm_dataset_cols(const asvm_dataset* data);
ASVM_API asvm_status asvm_dataset_labels(const asvm_dataset* data, double* out, size_t n);

/* models */
typedef struct asvm_model_info {
  int basis; /* 0 cosine, 1 haar */
  int dimension;
  size_t coefficients;
  size_t terms;
  int reg; /* 0 l2, 1 l1 */
  double lambda;
  size_t iterations;
  int converged;
  int scaled;
} asvm_model_info;

/* Fits on the whole dataset with the single lambda of the config
 * (a grid with more than one value is rejected). */
ASVM_API asvm_status asvm_model_fit(const asvm_config* config, const asvm_dataset* data, asvm_model** out);
ASVM_API asvm_status asvm_model_load(const char* path, asvm_model** out);
ASVM_API asvm_status asvm_model_save(const asvm_model* model, const char* path);
ASVM_API void asvm_model_destroy(asvm_model* model);
ASVM_API asvm_status asvm_model_info_get(const asvm_model* model, asvm_model_info* out);
ASVM_API asvm_status asvm_model_coefficients(const asvm_model* model, double* out, size_t n);
/* X is row-major rows x cols in raw (unscaled) units */
ASVM_API asvm_status asvm_model_decision(const asvm_model* model, const double* X, size_t rows, size_t cols,
                                         double* scores);
ASVM_API asvm_status asvm_model_predict(const asvm_model* model, const double* X, size_t rows, size_t cols,
                                        double* labels);

/* sensitivity analysis */
ASVM_API asvm_status asvm_model_gsi(const asvm_model* model, asvm_gsi_report** out);
ASVM_API void asvm_gsi_destroy(asvm_gsi_report* report);
ASVM_API size_t asvm_gsi_count(const asvm_gsi_report* report);
ASVM_API int asvm_gsi_degenerate(const asvm_gsi_report* report);
/* subset text ("1+2") written to buf, NUL-terminated; fails when it does not fit */
ASVM_API asvm_status asvm_gsi_entry(const asvm_gsi_report* report, size_t rank, char* buf, size_t buf_len,
                                    double* rho);

/* metrics on n scores against -1/+1 labels: CA in percent, AUC in [0,1]
   (NaN when the labels hold a single class) */
ASVM_API asvm_status asvm_metrics(const double* scores, const double* labels, size_t n, double* ca, double* auc);

#ifdef __cplusplus
}
#endif

#endif
