#ifndef BOCHNER_H
#define BOCHNER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BochnerPhantom {
  BOCHNER_PHANTOM_INTENSITY = 0,
  BOCHNER_PHANTOM_MASS = 1,
} BochnerPhantom;

typedef enum BochnerSolver {
  BOCHNER_SOLVER_TEMPORAL = 0,
  BOCHNER_SOLVER_LANDWEBER = 1,
  BOCHNER_SOLVER_DUAL = 2,
  BOCHNER_SOLVER_DUAL_STATIC = 3,
  BOCHNER_SOLVER_FBP = 4,
} BochnerSolver;

// Result of every fallible call.
typedef enum BochnerStatus {
  BOCHNER_STATUS_OK = 0,
  BOCHNER_STATUS_NULL_POINTER = 1,
  BOCHNER_STATUS_INVALID_ARGUMENT = 2,
  BOCHNER_STATUS_CONFIG = 3,
  BOCHNER_STATUS_NUMERICAL = 4,
  BOCHNER_STATUS_IO = 5,
  BOCHNER_STATUS_PANIC = 6,
} BochnerStatus;

// Experiment configuration.
typedef struct BochnerConfig BochnerConfig;

// Dynamic sinogram, `(t, angle, offset)` row-major.
typedef struct BochnerSinogram BochnerSinogram;

// Time series of square images, `(t, y, x)` row-major.
typedef struct BochnerVolume BochnerVolume;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *bochner_last_error(void);

// Library version as a static string.
const char *bochner_version(void);

// Default configuration of one of the two simulated experiments.
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
enum BochnerStatus bochner_config_preset(enum BochnerPhantom kind, struct BochnerConfig **out);

// Configuration from a JSON object overriding the preset it names.
//
// # Safety
// `json` must be a NUL-terminated string; `out` as in [`bochner_config_preset`].
enum BochnerStatus bochner_config_from_json(const char *json, struct BochnerConfig **out);

// Selects the solver and its regularization parameters.
//
// # Safety
// `cfg` must be a live handle.
enum BochnerStatus bochner_config_set_solver(struct BochnerConfig *cfg,
                                             enum BochnerSolver solver,
                                             double alpha,
                                             double beta,
                                             double gamma);

// # Safety
// `cfg` must be null or a handle not freed before.
void bochner_config_free(struct BochnerConfig *cfg);

// Volume from `n_time · size · size` values.
//
// # Safety
// `data` must point to that many readable values; `out` as above.
enum BochnerStatus bochner_volume_new(size_t n_time,
                                      size_t size,
                                      double horizon,
                                      const double *data,
                                      struct BochnerVolume **out);

// Ground-truth phantom of the configured experiment at `resolution`.
//
// # Safety
// `cfg` must be a live handle; `out` as above.
enum BochnerStatus bochner_phantom(const struct BochnerConfig *cfg,
                                   size_t resolution,
                                   struct BochnerVolume **out);

// Writes the volume's frame count and image side length.
//
// # Safety
// All pointers must be valid.
enum BochnerStatus bochner_volume_dims(const struct BochnerVolume *vol,
                                       size_t *n_time,
                                       size_t *size);

// Copies the values into `buf`, which must hold exactly `len` of them.
//
// # Safety
// `buf` must point to `len` writable values.
enum BochnerStatus bochner_volume_copy(const struct BochnerVolume *vol, double *buf, size_t len);

// # Safety
// `vol` must be null or a handle not freed before.
void bochner_volume_free(struct BochnerVolume *vol);

// Projects `vol` with the configured geometry and adds the configured
// seeded noise. The noise norm goes to `delta` when it is not null.
//
// # Safety
// Handles must be live; `out` as above; `delta` null or writable.
enum BochnerStatus bochner_sinogram(const struct BochnerConfig *cfg,
                                    const struct BochnerVolume *vol,
                                    struct BochnerSinogram **out,
                                    double *delta);

// Number of samples in the sinogram.
//
// # Safety
// `sino` must be a live handle and `len` writable.
enum BochnerStatus bochner_sinogram_len(const struct BochnerSinogram *sino, size_t *len);

// # Safety
// `buf` must point to `len` writable values.
enum BochnerStatus bochner_sinogram_copy(const struct BochnerSinogram *sino,
                                         double *buf,
                                         size_t len);

// # Safety
// `sino` must be null or a handle not freed before.
void bochner_sinogram_free(struct BochnerSinogram *sino);

// Runs the configured solver on the configured reconstruction grid.
//
// # Safety
// Handles must be live; `out` as above; `iterations` null or writable.
enum BochnerStatus bochner_reconstruct(const struct BochnerConfig *cfg,
                                       const struct BochnerSinogram *sino,
                                       struct BochnerVolume **out,
                                       size_t *iterations);

// Relative `L²` error of `reco` against `truth` in percent. Both volumes
// must share the grid.
//
// # Safety
// Handles must be live and `error` writable.
enum BochnerStatus bochner_relative_error(const struct BochnerVolume *reco,
                                          const struct BochnerVolume *truth,
                                          double *error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOCHNER_H */
