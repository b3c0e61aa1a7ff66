#ifndef LPNML_H
#define LPNML_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LpnmlStatus {
  LPNML_STATUS_OK = 0,
  LPNML_STATUS_NULL_POINTER = 1,
  LPNML_STATUS_DIMENSION_MISMATCH = 2,
  LPNML_STATUS_SINGULAR_MATRIX = 3,
  LPNML_STATUS_NUMERICAL_FAILURE = 4,
  LPNML_STATUS_INVALID_PARAMETER = 5,
  LPNML_STATUS_INSUFFICIENT_DATA = 6,
  LPNML_STATUS_DIVISION_BY_ZERO = 7,
  LPNML_STATUS_IO = 8,
  LPNML_STATUS_PARSE = 9,
  LPNML_STATUS_MISSING_LABEL_COLUMN = 10,
  LPNML_STATUS_EMPTY_SIDE = 11,
  LPNML_STATUS_PANIC = 12,
} LpnmlStatus;

typedef enum LpnmlLearner {
  LPNML_LEARNER_RIDGE = 0,
  LPNML_LEARNER_BAYES = 1,
  LPNML_LEARNER_PNML = 2,
  LPNML_LEARNER_LPNML = 3,
} LpnmlLearner;

typedef enum LpnmlLoss {
  LPNML_LOSS_SQUARED_ERROR = 0,
  LPNML_LOSS_LOG_LOSS = 1,
} LpnmlLoss;

/**
 * Opaque training set.
 */
typedef struct LpnmlDataset LpnmlDataset;

/**
 * Opaque fitted ridge state.
 */
typedef struct LpnmlModel LpnmlModel;

/**
 * Gaussian predictive distribution.
 */
typedef struct LpnmlPrediction {
  double mean;
  double variance;
} LpnmlPrediction;

/**
 * Per-point LpNML constants; `log_c` is the log of the normalizer weight.
 */
typedef struct LpnmlPointConstants {
  double mu_shift;
  double variance;
  double log_c;
  double k_lambda;
} LpnmlPointConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into this library from the same thread.
 */
const char *lpnml_last_error_message(void);

/**
 * Copies a row-major `n_samples × n_features` matrix and its labels.
 *
 * # Safety
 * `features` must point to `n_samples * n_features` doubles, `labels` to
 * `n_samples` doubles, and `out` must be writable.
 */
enum LpnmlStatus lpnml_dataset_new(const double *features,
                                   const double *labels,
                                   size_t n_samples,
                                   size_t n_features,
                                   struct LpnmlDataset **out);

/**
 * Loads a CSV file. `label_column` is a header name, a 0-based index, or
 * NULL for the last column.
 *
 * # Safety
 * `path` and a non-NULL `label_column` must be NUL-terminated UTF-8 strings.
 */
enum LpnmlStatus lpnml_dataset_load_csv(const char *path,
                                        const char *label_column,
                                        bool has_header,
                                        struct LpnmlDataset **out);

/**
 * # Safety
 * `dataset` must be NULL or a handle from this library not yet freed.
 */
void lpnml_dataset_free(struct LpnmlDataset *dataset);

/**
 * # Safety
 * `dataset` must be a live handle; the outputs must be writable.
 */
enum LpnmlStatus lpnml_dataset_shape(const struct LpnmlDataset *dataset,
                                     size_t *n_samples,
                                     size_t *n_features);

/**
 * # Safety
 * `dataset` must be a live handle and `out` writable.
 */
enum LpnmlStatus lpnml_model_fit(const struct LpnmlDataset *dataset,
                                 double lambda,
                                 double noise_variance,
                                 struct LpnmlModel **out);

/**
 * # Safety
 * `model` must be NULL or a handle from this library not yet freed.
 */
void lpnml_model_free(struct LpnmlModel *model);

/**
 * Feature count the model expects, or 0 for a NULL handle.
 *
 * # Safety
 * `model` must be NULL or a live handle.
 */
size_t lpnml_model_n_features(const struct LpnmlModel *model);

/**
 * Copies the ridge coefficients into `out` (length `len`, which must equal
 * the feature count).
 *
 * # Safety
 * `model` must be a live handle; `out` must hold `len` doubles.
 */
enum LpnmlStatus lpnml_model_theta(const struct LpnmlModel *model, double *out, size_t len);

/**
 * # Safety
 * `model` must be a live handle, `x` must hold `len` doubles and `out` must
 * be writable.
 */
enum LpnmlStatus lpnml_predict(const struct LpnmlModel *model,
                               enum LpnmlLearner learner,
                               const double *x,
                               size_t len,
                               struct LpnmlPrediction *out);

/**
 * # Safety
 * As [`lpnml_predict`].
 */
enum LpnmlStatus lpnml_point_constants(const struct LpnmlModel *model,
                                       const double *x,
                                       size_t len,
                                       struct LpnmlPointConstants *out);

/**
 * Min-max regret of the LpNML at `x`.
 *
 * # Safety
 * As [`lpnml_predict`].
 */
enum LpnmlStatus lpnml_minmax_regret(const struct LpnmlModel *model,
                                     const double *x,
                                     size_t len,
                                     double *out);

/**
 * Leave-one-out selection over the given grids.
 *
 * # Safety
 * `dataset` must be a live handle; the grids must hold their stated lengths
 * and the outputs must be writable.
 */
enum LpnmlStatus lpnml_tune(const struct LpnmlDataset *dataset,
                            enum LpnmlLearner learner,
                            enum LpnmlLoss loss,
                            const double *lambdas,
                            size_t n_lambdas,
                            const double *noise_variances,
                            size_t n_noise_variances,
                            double *out_lambda,
                            double *out_noise_variance);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LPNML_H */
