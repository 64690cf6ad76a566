/* Generated by cbindgen from crates/ffi; do not edit. */

#ifndef SDLAB_H
#define SDLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SDLAB_MASK_BRIDGE (1 << 0)

#define SDLAB_MASK_CHIB (1 << 1)

#define SDLAB_MASK_IS (1 << 2)

#define SDLAB_MASK_MR (1 << 3)

#define SDLAB_MASK_VW (1 << 4)

#define SDLAB_MASK_ALL 31

// Result of every fallible call. On anything but `SDLAB_STATUS_OK`,
// `sdlab_last_error_message` describes the failure.
typedef enum SdlabStatus {
  SDLAB_STATUS_OK = 0,
  SDLAB_STATUS_NULL_POINTER = 1,
  SDLAB_STATUS_INVALID_ARGUMENT = 2,
  SDLAB_STATUS_IO = 3,
  SDLAB_STATUS_NUMERIC = 4,
  SDLAB_STATUS_PANIC = 5,
} SdlabStatus;

typedef enum SdlabMethod {
  SDLAB_METHOD_BRIDGE = 0,
  SDLAB_METHOD_CHIB = 1,
  SDLAB_METHOD_IS = 2,
  SDLAB_METHOD_MR = 3,
  SDLAB_METHOD_VW = 4,
} SdlabMethod;

// Opaque table of experiment rows, sorted by (method, replica).
typedef struct SdlabExperiment SdlabExperiment;

// Opaque probit data set.
typedef struct SdlabProbitData SdlabProbitData;

// Toy-model estimates at one observation.
typedef struct SdlabToyEstimate {
  double closed_form;
  double mr;
  double mr_se;
  double vw;
  double vw_se;
  double ratio_forward;
  double ratio_reciprocal;
  double coherence_stat;
} SdlabToyEstimate;

// Chain and replication settings for [`sdlab_experiment_run`].
typedef struct SdlabExperimentOptions {
  // Iterations per chain, burn-in included.
  size_t iters;
  size_t burnin;
  size_t replicas;
  uint64_t seed;
  // Bitwise OR of `SDLAB_MASK_*`.
  uint32_t methods;
  // Worker threads; 0 means the library default.
  size_t threads;
} SdlabExperimentOptions;

// One `(method, replica)` cell. Values are NaN when absent or when `ok` is false.
typedef struct SdlabRow {
  enum SdlabMethod method;
  size_t replica;
  uint64_t seed;
  size_t iters;
  size_t burnin;
  double bf_estimate;
  double log_bf;
  double rb_term;
  double ratio_term;
  double coherence_stat;
  bool ok;
} SdlabRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Closed-form `B₀₁(x)` of the toy model.
enum SdlabStatus sdlab_toy_bf_closed(double x, double *out);

// MR and VW estimates plus the coherence statistic on the toy model.
enum SdlabStatus sdlab_toy_estimate(double x,
                                    size_t iters,
                                    size_t burnin,
                                    uint64_t seed,
                                    struct SdlabToyEstimate *out);

// Loads a `type,glu,bp,ped` CSV. Free the handle with [`sdlab_probit_data_free`].
//
// # Safety
// `path` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
enum SdlabStatus sdlab_probit_data_load(const char *path, struct SdlabProbitData **out);

// The Pima test partition shipped with the library.
enum SdlabStatus sdlab_probit_data_bundled(struct SdlabProbitData **out);

// Number of observations, or 0 for NULL.
size_t sdlab_probit_data_rows(const struct SdlabProbitData *data);

// # Safety
// `data` must be NULL or a handle from this library that has not been freed.
void sdlab_probit_data_free(struct SdlabProbitData *data);

// Runs the replicated comparison, testing the last data column under a
// unit-information g-prior. Free the result with [`sdlab_experiment_free`].
enum SdlabStatus sdlab_experiment_run(const struct SdlabProbitData *data,
                                      const struct SdlabExperimentOptions *options,
                                      struct SdlabExperiment **out);

// Number of rows, or 0 for NULL.
size_t sdlab_experiment_len(const struct SdlabExperiment *exp);

enum SdlabStatus sdlab_experiment_row(const struct SdlabExperiment *exp,
                                      size_t index,
                                      struct SdlabRow *out);

// Writes the harness CSV to `path`.
//
// # Safety
// `path` must be NULL or a NUL-terminated string.
enum SdlabStatus sdlab_experiment_write_csv(const struct SdlabExperiment *exp, const char *path);

// The harness CSV as a new string; release it with [`sdlab_string_free`].
enum SdlabStatus sdlab_experiment_to_csv(const struct SdlabExperiment *exp, char **out);

// # Safety
// `exp` must be NULL or a handle from this library that has not been freed.
void sdlab_experiment_free(struct SdlabExperiment *exp);

// # Safety
// `s` must be NULL or a string returned by this library that has not been freed.
void sdlab_string_free(char *s);

// Message for the most recent failure on the calling thread, or NULL.
// The pointer stays valid until the next `sdlab_*` call on this thread.
const char *sdlab_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SDLAB_H */
