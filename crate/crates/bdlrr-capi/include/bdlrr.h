/* C interface for block-diagonal low-rank representation learning. */

#ifndef BDLRR_H
#define BDLRR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of every fallible call.
typedef enum BdlrrStatus {
  BDLRR_STATUS_OK = 0,
  // A required pointer argument was null.
  BDLRR_STATUS_NULL_POINTER = 1,
  // A parameter or label was out of range.
  BDLRR_STATUS_INVALID_ARGUMENT = 2,
  // Buffer dimensions are inconsistent.
  BDLRR_STATUS_DIMENSION_MISMATCH = 3,
  // A matrix decomposition failed or an iterate became non-finite.
  BDLRR_STATUS_NUMERICAL_FAILURE = 4,
  // Iteration cap reached before the tolerance; the produced model is
  // still usable.
  BDLRR_STATUS_NOT_CONVERGED = 5,
  // An internal panic was caught; the call had no effect.
  BDLRR_STATUS_INTERNAL_PANIC = 6,
} BdlrrStatus;

// Opaque trained model: classifier, normalized training dictionary, and
// the out-of-sample configuration.
typedef struct BdlrrModel BdlrrModel;

// Hyperparameters of the joint solve, the classifier, and the
// out-of-sample extension.
typedef struct BdlrrConfig {
  // Off-block shrinkage weight.
  double lambda1;
  // Distance-weighted sparsity weight.
  double lambda2;
  // Row-group noise weight.
  double lambda3;
  // Ridge regularization of the classifier.
  double gamma;
  // Penalty growth factor (> 1).
  double rho;
  // Initial penalty.
  double mu0;
  // Penalty cap.
  double mu_max;
  // Convergence tolerance on the max residual.
  double tol;
  // Joint-solve iteration cap.
  uint32_t max_iter;
  // Out-of-sample iteration cap.
  uint32_t oos_max_iter;
  // Out-of-sample stop on max-abs iterate change.
  double oos_step_tol;
} BdlrrConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Writes the default configuration into `out`.
//
// # Safety
// `out` must be null or point to writable storage for one `BdlrrConfig`.
enum BdlrrStatus bdlrr_config_default(struct BdlrrConfig *out);

// Trains on column-major buffers: `x_tr` is `d x n`, `labels` holds `n`
// 1-based class indices, `x_tt` is `d x m` (null allowed when `m` is 0).
// Training columns may arrive in any label order; they are sorted into
// contiguous class blocks internally, and every class up to the largest
// label must appear at least once. On success `*out_model` owns the
// trained model and, when `out_test_labels` is non-null, the `m`
// predicted labels of the test columns are written there in input order.
//
// Returns `BDLRR_STATUS_NOT_CONVERGED` when the iteration cap was reached
// first; the handle is still produced and usable.
//
// # Safety
// Pointers must reference buffers of the stated sizes; `out_model` must
// be a valid location to store the handle. Free the handle with
// [`bdlrr_model_free`].
enum BdlrrStatus bdlrr_train(const struct BdlrrConfig *config,
                             const double *x_tr,
                             uintptr_t d,
                             uintptr_t n,
                             const uint32_t *labels,
                             const double *x_tt,
                             uintptr_t m,
                             uint32_t *out_test_labels,
                             struct BdlrrModel **out_model);

// Classifies one new instance (`d` entries, any scale; it is normalized
// internally) and writes the 1-based label into `out_label`.
//
// # Safety
// `model` must come from [`bdlrr_train`] and not have been freed;
// `instance` must hold `d` doubles matching the model's feature
// dimension.
enum BdlrrStatus bdlrr_predict_oos(const struct BdlrrModel *model,
                                   const double *instance,
                                   uintptr_t d,
                                   uint32_t *out_label);

// Number of classes the model distinguishes; 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle from [`bdlrr_train`].
uintptr_t bdlrr_model_num_classes(const struct BdlrrModel *model);

// Feature dimension the model expects; 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle from [`bdlrr_train`].
uintptr_t bdlrr_model_feature_dim(const struct BdlrrModel *model);

// Number of training samples behind the model; 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle from [`bdlrr_train`].
uintptr_t bdlrr_model_train_count(const struct BdlrrModel *model);

// Whether the joint solve reached its tolerance (1) or hit the iteration
// cap (0). Returns 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle from [`bdlrr_train`].
int32_t bdlrr_model_converged(const struct BdlrrModel *model);

// Fraction of the learned training representation's squared mass lying
// outside the class-diagonal blocks (0 = perfectly block-diagonal).
//
// # Safety
// `model` must be null or a live handle from [`bdlrr_train`]; `out_ratio`
// must be null or point to writable storage for one `double`.
enum BdlrrStatus bdlrr_model_off_block_ratio(const struct BdlrrModel *model, double *out_ratio);

// Releases a model handle. Null is a no-op.
//
// # Safety
// `model` must come from [`bdlrr_train`] and must not be used afterwards.
void bdlrr_model_free(struct BdlrrModel *model);

// Static, nul-terminated description of a status code.
const char *bdlrr_status_message(enum BdlrrStatus status);

// Static, nul-terminated library version.
const char *bdlrr_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BDLRR_H */
