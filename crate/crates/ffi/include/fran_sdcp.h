#ifndef FRAN_SDCP_H
#define FRAN_SDCP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum FsStatus {
  FS_STATUS_OK = 0,
  FS_STATUS_NULL_POINTER = 1,
  FS_STATUS_DOMAIN = 2,
  FS_STATUS_NON_CONVERGENCE = 3,
  FS_STATUS_STABILITY = 4,
  FS_STATUS_NUMERICAL = 5,
  FS_STATUS_CONFIG = 6,
  FS_STATUS_PANIC = 7,
} FsStatus;

// Compression mode selector; `beta` arguments are read only for `Hybrid`.
typedef enum FsMode {
  FS_MODE_LOCAL = 0,
  FS_MODE_EDGE = 1,
  FS_MODE_HYBRID = 2,
} FsMode;

// Opaque model: configuration plus the cached threshold-dependent terms.
typedef struct FsModel FsModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Model with the reference parameters.
enum FsStatus fs_model_new_reference(struct FsModel **out);

// Model from a JSON configuration document (UTF-8, NUL-terminated).
enum FsStatus fs_model_new_from_json(const char *json, struct FsModel **out);

// Releases a model. Null is ignored.
void fs_model_free(struct FsModel *model);

// Sets the SIR threshold in dB and refreshes the cached STP and rate.
enum FsStatus fs_model_set_threshold_db(struct FsModel *model, double tau_db);

// Sets the end-to-end latency target in seconds.
enum FsStatus fs_model_set_target_latency(struct FsModel *model, double seconds);

// Sets the per-UE task generation rate in tasks/s.
enum FsStatus fs_model_set_task_rate(struct FsModel *model, double tasks_per_second);

// Sets the backhaul capacity in bit/s.
enum FsStatus fs_model_set_backhaul(struct FsModel *model, double bits_per_second);

// Closed-form successful transmission probability.
enum FsStatus fs_stp(const struct FsModel *model, double *out);

// Successful transmission probability by nested quadrature. Slow.
enum FsStatus fs_stp_exact(const struct FsModel *model, double *out);

// Average uplink rate in bit/s.
enum FsStatus fs_uplink_rate(const struct FsModel *model, double *out);

// Successful task execution probability.
enum FsStatus fs_step(const struct FsModel *model, enum FsMode mode, double beta, double *out);

// Successful data compression probability.
enum FsStatus fs_sdcp(const struct FsModel *model, enum FsMode mode, double beta, double *out);

// Offloading ratio maximising the hybrid SDCP, and the maximum.
enum FsStatus fs_optimize_beta(const struct FsModel *model, double *beta_out, double *sdcp_out);

// Density of the access-point sojourn time at `t` seconds.
enum FsStatus fs_mg1_sojourn_pdf(double lambda, double mu_dd, double mu_cp, double t, double *out);

// Distribution function of the access-point sojourn time.
enum FsStatus fs_mg1_sojourn_cdf(double lambda, double mu_dd, double mu_cp, double t, double *out);

// Laplace transform of the access-point sojourn density at `s >= 0`.
enum FsStatus fs_mg1_sojourn_laplace(double lambda,
                                     double mu_dd,
                                     double mu_cp,
                                     double s,
                                     double *out);

// Message of the last failed call on this thread; empty after a success.
const char *fs_last_error_message(void);

// Library version, static storage.
const char *fs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRAN_SDCP_H */
