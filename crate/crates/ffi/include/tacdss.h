#ifndef TACDSS_H
#define TACDSS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TacdssStatus {
  TACDSS_STATUS_OK = 0,
  TACDSS_STATUS_NULL_POINTER = 1,
  TACDSS_STATUS_INVALID_ARGUMENT = 2,
  TACDSS_STATUS_OUT_OF_RANGE = 3,
  TACDSS_STATUS_IO = 4,
  TACDSS_STATUS_PARSE = 5,
  TACDSS_STATUS_NUMERICAL = 6,
  TACDSS_STATUS_PANIC = 7,
} TacdssStatus;

/**
 * A set of physical-unit samples.
 */
typedef struct TacdssDataset TacdssDataset;

/**
 * A trained model with its normalisation.
 */
typedef struct TacdssModel TacdssModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next call.
 */
const char *tacdss_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void tacdss_string_free(char *s);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TacdssStatus tacdss_model_load(const char *path, struct TacdssModel **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TacdssStatus tacdss_model_from_json(const char *json, struct TacdssModel **out);

/**
 * Serialises the model; free the result with [`tacdss_string_free`].
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum TacdssStatus tacdss_model_to_json(const struct TacdssModel *model, char **out);

/**
 * Decision score in points for physical inputs.
 *
 * # Safety
 * `model` must be a live handle and `score` a valid pointer.
 */
enum TacdssStatus tacdss_model_predict(const struct TacdssModel *model,
                                       double fuel,
                                       double intercept_time,
                                       double weapon,
                                       double danger,
                                       double *score);

/**
 * Static name of the model family ("anfis", "mamdani", "mlp" or "cart"), or NULL.
 *
 * # Safety
 * `model` must be NULL or a live handle.
 */
const char *tacdss_model_kind(const struct TacdssModel *model);

/**
 * # Safety
 * `model` must be NULL or a handle not yet freed.
 */
void tacdss_model_free(struct TacdssModel *model);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum TacdssStatus tacdss_dataset_generate(uint64_t seed,
                                          size_t n,
                                          bool jitter,
                                          struct TacdssDataset **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TacdssStatus tacdss_dataset_read_csv(const char *path, struct TacdssDataset **out);

/**
 * Number of samples, or 0 for NULL.
 *
 * # Safety
 * `dataset` must be NULL or a live handle.
 */
size_t tacdss_dataset_len(const struct TacdssDataset *dataset);

/**
 * Copies sample `index` as fuel, intercept time, weapon, danger, score into `row[5]`.
 *
 * # Safety
 * `dataset` must be a live handle and `row` point to 5 writable doubles.
 */
enum TacdssStatus tacdss_dataset_sample(const struct TacdssDataset *dataset,
                                        size_t index,
                                        double *row);

/**
 * # Safety
 * `dataset` must be a live handle and `path` a NUL-terminated string.
 */
enum TacdssStatus tacdss_dataset_write_csv(const struct TacdssDataset *dataset, const char *path);

/**
 * # Safety
 * `dataset` must be NULL or a handle not yet freed.
 */
void tacdss_dataset_free(struct TacdssDataset *dataset);

/**
 * Trains `kind` ("anfis", "anfis-bp", "mamdani-gd", "mamdani-ga", "mlp", "cart").
 *
 * With `train_fraction` in (0,1) the rest of the data is held out and its
 * normalised RMSE written to `test_rmse` (NaN otherwise). `config_json` may
 * be NULL for defaults; `test_rmse` may be NULL.
 *
 * # Safety
 * Pointers must be valid as described; `out` receives a new model handle.
 */
enum TacdssStatus tacdss_train(const char *kind,
                               const struct TacdssDataset *dataset,
                               double train_fraction,
                               uint64_t seed,
                               const char *config_json,
                               struct TacdssModel **out,
                               double *test_rmse);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TACDSS_H */
