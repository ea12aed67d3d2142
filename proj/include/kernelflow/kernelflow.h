/* C interface to libkernelflow. All functions return a kf_status; on failure
   kf_last_error() holds a message for the calling thread. Handles are opaque
   and owned by the caller (free with the matching *_free). */
#ifndef KERNELFLOW_H
#define KERNELFLOW_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define KF_API __declspec(dllexport)
#else
#define KF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kf_status {
    KF_OK = 0,
    KF_NON_MONOTONE_CURVE = 1,
    KF_TAIL_MASS_TOO_LARGE = 2,
    KF_OUT_OF_RANGE = 3,
    KF_EXHAUSTED_SUPPORT = 4,
    KF_MISSING_STATE = 5,
    KF_DIMENSION_MISMATCH = 6,
    KF_NUMERICAL_UNDERFLOW = 7,
    KF_NEGATIVE_DENSITY = 8,
    KF_DEGENERATE_ESS = 9,
    KF_MISALIGNED_SCHEDULE = 10,
    KF_NON_ORTHOGONAL = 11,
    KF_SCHEMA_ERROR = 12,
    KF_INVARIANT_VIOLATION = 13,
    KF_CONFIG_MISMATCH = 14,
    KF_NOT_APPLICABLE = 15,
    KF_IO_ERROR = 16,
    KF_INVALID_ARGUMENT = 100,
    KF_INTERNAL = 101
} kf_status;

typedef struct kf_config kf_config;
typedef struct kf_filter kf_filter;

typedef struct kf_kernel_point {
    double t;
    double pi;
    double Pi;
    double r;
    double N;
} kf_kernel_point;

KF_API const char* kf_version(void);
KF_API const char* kf_status_name(int status);
/* Message of the last failure on this thread; "" if none. */
KF_API const char* kf_last_error(void);

/* Config: parsed and validated eagerly; overrides trigger a re-parse. */
KF_API int kf_config_load(const char* path, kf_config** out);
KF_API int kf_config_parse(const char* json_text, const char* base_dir, kf_config** out);
KF_API int kf_config_set_seed(kf_config* cfg, uint64_t seed);
KF_API int kf_config_set_paths(kf_config* cfg, size_t n_paths);
KF_API int kf_config_set_output(kf_config* cfg, const char* dir);
KF_API int kf_config_hash(const kf_config* cfg, char* buf, size_t len);
KF_API void kf_config_free(kf_config* cfg);

/* Runs a subcommand; *acceptance_ok is 0 when a built-in check failed. */
KF_API int kf_run(const kf_config* cfg, const char* subcommand, size_t threads, int* acceptance_ok);
/* One-line digest of the last successful kf_run on this thread. */
KF_API const char* kf_last_summary(void);

/* Step-by-step filter for the config's density and v. */
KF_API int kf_filter_create(const kf_config* cfg, kf_filter** out);
KF_API size_t kf_filter_dim(const kf_filter* f);
KF_API int kf_filter_step(kf_filter* f, const double* dxi, size_t dim);
KF_API int kf_filter_kernel(const kf_filter* f, kf_kernel_point* out);
/* lambda has kf_filter_dim entries. */
KF_API int kf_filter_risk_premium(const kf_filter* f, double* lambda, size_t dim);
KF_API int kf_filter_bond_price(const kf_filter* f, double maturity, double* out);
KF_API void kf_filter_free(kf_filter* f);

#ifdef __cplusplus
}
#endif

#endif
