#ifndef RHYTHMSVM_H
#define RHYTHMSVM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RsvmStatus {
  RSVM_STATUS_OK = 0,
  RSVM_STATUS_NULL_POINTER = 1,
  RSVM_STATUS_INVALID_ARGUMENT = 2,
  RSVM_STATUS_IO = 3,
  RSVM_STATUS_PARSE = 4,
  RSVM_STATUS_NUMERIC = 5,
  RSVM_STATUS_BUFFER_TOO_SMALL = 6,
  RSVM_STATUS_PANIC = 7,
} RsvmStatus;

typedef enum RsvmAggregation {
  RSVM_AGGREGATION_MEAN = 0,
  RSVM_AGGREGATION_MEDIAN = 1,
  RSVM_AGGREGATION_MAJORITY = 2,
  RSVM_AGGREGATION_MAX = 3,
} RsvmAggregation;

typedef enum RsvmLoss {
  RSVM_LOSS_HINGE = 0,
  RSVM_LOSS_HAMMING = 1,
  RSVM_LOSS_EXPONENTIAL = 2,
  RSVM_LOSS_LINEAR = 3,
} RsvmLoss;

// Opaque trained model.
typedef struct RsvmModel RsvmModel;

// Opaque annotated record.
typedef struct RsvmRecord RsvmRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rsvm_version(void);

// Description of the last failure on this thread; empty after success.
const char *rsvm_last_error_message(void);

// Loads a record and its `.ann` sidecar.
//
// # Safety
// `path` must be a NUL-terminated string and `out_record` writable.
enum RsvmStatus rsvm_record_load(const char *path, struct RsvmRecord **out_record);

// # Safety
// `record` must come from `rsvm_record_load` and not be freed twice.
void rsvm_record_free(struct RsvmRecord *record);

// # Safety
// `record` must be a live handle and `out_len` writable.
enum RsvmStatus rsvm_record_len(const struct RsvmRecord *record, size_t *out_len);

// # Safety
// `record` must be a live handle and `out_fs` writable.
enum RsvmStatus rsvm_record_fs(const struct RsvmRecord *record, uint32_t *out_fs);

// Copies the samples into `buf`. `written` receives the sample count even
// when the buffer is too small.
//
// # Safety
// `buf` must hold `cap` doubles; `written` must be writable.
enum RsvmStatus rsvm_record_samples(const struct RsvmRecord *record,
                                    double *buf,
                                    size_t cap,
                                    size_t *written);

// Loads a model written by `rhythmsvm run` (`model.json`).
//
// # Safety
// `path` must be a NUL-terminated string and `out_model` writable.
enum RsvmStatus rsvm_model_load(const char *path, struct RsvmModel **out_model);

// # Safety
// `model` must come from `rsvm_model_load` and not be freed twice.
void rsvm_model_free(struct RsvmModel *model);

// Segment length in 100 Hz samples the model expects.
//
// # Safety
// `model` must be a live handle and `out_len` writable.
enum RsvmStatus rsvm_model_segment_len(const struct RsvmModel *model, size_t *out_len);

// Number of binary classifiers (decision values per segment).
//
// # Safety
// `model` must be a live handle and `out_n` writable.
enum RsvmStatus rsvm_model_n_classifiers(const struct RsvmModel *model, size_t *out_n);

// Decision values of one preprocessed segment.
//
// # Safety
// `samples` must hold `len` doubles and `buf` `cap` doubles.
enum RsvmStatus rsvm_model_decision_values(const struct RsvmModel *model,
                                           const double *samples,
                                           size_t len,
                                           double *buf,
                                           size_t cap,
                                           size_t *written);

// Predicted class of one preprocessed segment. For three-way models this
// is the label index; for binary tasks it is the group index (0 for the
// first group, 1 for VF).
//
// # Safety
// `samples` must hold `len` doubles and `out_class` be writable.
enum RsvmStatus rsvm_model_classify(const struct RsvmModel *model,
                                    const double *samples,
                                    size_t len,
                                    uint32_t *out_class);

// Classifies a window from shifted sub-segments of the model's segment
// length. `segment_s` must match the model; `aggregation` is an
// `RsvmAggregation` value.
//
// # Safety
// `window` must hold `len` doubles and `out_class` be writable.
enum RsvmStatus rsvm_ensemble_classify(const struct RsvmModel *model,
                                       const double *window,
                                       size_t len,
                                       double window_s,
                                       double segment_s,
                                       double shift_s,
                                       uint32_t aggregation,
                                       uint32_t *out_class);

// PSA grid occupancy η of a segment sampled at `fs`.
//
// # Safety
// `samples` must hold `len` doubles and `out_eta` be writable.
enum RsvmStatus rsvm_psa_eta(const double *samples, size_t len, uint32_t fs, double *out_eta);

// PSM grid occupancy η of a segment.
//
// # Safety
// `samples` must hold `len` doubles and `out_eta` be writable.
enum RsvmStatus rsvm_psm_eta(const double *samples, size_t len, double *out_eta);

// Magnitude spectrum (`len / 2` bins) of an even-length segment.
//
// # Safety
// `samples` must hold `len` doubles and `buf` `cap` doubles.
enum RsvmStatus rsvm_magnitude_spectrum(const double *samples,
                                        size_t len,
                                        double *buf,
                                        size_t cap,
                                        size_t *written);

// Decodes six decision values with the standard SR/VT/VF code. `loss` is
// an `RsvmLoss` value.
//
// # Safety
// `values` must hold `n` doubles and `out_label` be writable.
enum RsvmStatus rsvm_decode(const double *values, size_t n, uint32_t loss, uint32_t *out_label);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RHYTHMSVM_H */
