#ifndef PLANFORGE_H
#define PLANFORGE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PfStatus {
  PF_STATUS_OK = 0,
  // Bad input files, formats or field values.
  PF_STATUS_INPUT_ERROR = 1,
  // The geometric pipeline could not produce a plan.
  PF_STATUS_PIPELINE_ERROR = 2,
  PF_STATUS_NULL_ARGUMENT = 3,
  // Index or buffer capacity out of range.
  PF_STATUS_OUT_OF_RANGE = 4,
  // Internal panic caught at the boundary.
  PF_STATUS_PANIC = 5,
} PfStatus;

// Opaque reconstructed floor plan.
typedef struct PfFloorPlan PfFloorPlan;

typedef struct PfOptions {
  uint64_t seed;
  // Boundary alignment distance, m.
  double snap_dist;
  // Near-collinear merge angle, degrees.
  double snap_angle_deg;
  // Cap on edge points per capture.
  uint64_t max_points;
} PfOptions;

typedef struct PfIntrinsics {
  double f;
  double cx;
  double cy;
  uint32_t width;
  uint32_t height;
} PfIntrinsics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread. Valid until the next call
// into this library from the same thread. Never null.
const char *pf_last_error(void);

struct PfOptions pf_options_default(void);

// Reconstructs the manifest at `manifest_path`. `options` may be null for
// defaults. On success `*out` owns a new plan.
//
// # Safety
// `manifest_path` must be a NUL-terminated string, `options` null or valid,
// `out` a valid pointer.
enum PfStatus pf_reconstruct(const char *manifest_path,
                             const struct PfOptions *options,
                             struct PfFloorPlan **out);

// Loads a plan file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum PfStatus pf_plan_load(const char *path, struct PfFloorPlan **out);

// Writes the plan file format.
//
// # Safety
// `plan` must come from this library; `path` must be NUL-terminated.
enum PfStatus pf_plan_save(const struct PfFloorPlan *plan, const char *path);

// Renders the plan as SVG into `path`.
//
// # Safety
// `plan` must come from this library; `path` must be NUL-terminated.
enum PfStatus pf_plan_render_svg(const struct PfFloorPlan *plan, const char *path);

// Number of rooms; 0 for a null plan.
//
// # Safety
// `plan` must be null or come from this library.
size_t pf_plan_room_count(const struct PfFloorPlan *plan);

// Number of door placements; 0 for a null plan.
//
// # Safety
// `plan` must be null or come from this library.
size_t pf_plan_door_count(const struct PfFloorPlan *plan);

// Area of room `index` (rooms are sorted by id), m^2.
//
// # Safety
// `plan` must come from this library and `out` be valid.
enum PfStatus pf_plan_room_area(const struct PfFloorPlan *plan, size_t index, double *out);

// Copies room `index`'s id, NUL-terminated, into `buf`. `*len` receives the
// id length without the terminator; when `capacity <= len` nothing is
// copied and `OutOfRange` is returned.
//
// # Safety
// `plan` must come from this library; `buf` must hold `capacity` bytes;
// `len` must be valid.
enum PfStatus pf_plan_room_id(const struct PfFloorPlan *plan,
                              size_t index,
                              char *buf,
                              size_t capacity,
                              size_t *len);

// Copies room `index`'s vertices as interleaved x, y pairs into `xy`
// (`capacity` pairs). `*count` receives the vertex count; when it exceeds
// `capacity` nothing is copied and `OutOfRange` is returned.
//
// # Safety
// `plan` must come from this library; `xy` must hold `2 * capacity`
// doubles; `count` must be valid.
enum PfStatus pf_plan_room_vertices(const struct PfFloorPlan *plan,
                                    size_t index,
                                    double *xy,
                                    size_t capacity,
                                    size_t *count);

// Releases a plan. Null is ignored.
//
// # Safety
// `plan` must be null or an unreleased plan from this library.
void pf_plan_free(struct PfFloorPlan *plan);

// Generates a synthetic dataset from a floor-spec file.
//
// # Safety
// Both paths must be NUL-terminated strings.
enum PfStatus pf_synth_generate(const char *spec_path, const char *out_dir);

// PSNR in dB for a mean squared error; +infinity when `mse` is 0.
double pf_psnr_from_mse(double mse, double max);

// Global SSIM of two `width * height` images with dynamic range `range`.
//
// # Safety
// `x` and `y` must each hold `width * height` doubles; `out` must be valid.
enum PfStatus pf_ssim(const double *x,
                      const double *y,
                      uint32_t width,
                      uint32_t height,
                      double range,
                      double *out);

// Mean absolute percentage error of `n` values against ground truth.
//
// # Safety
// `values` and `gt` must each hold `n` doubles; `out` must be valid.
enum PfStatus pf_mape(const double *values, const double *gt, size_t n, double *out);

// 1 when (`px`, `py`) is inside or on the polygon of `n` interleaved
// vertices, 0 outside, -1 on bad arguments.
//
// # Safety
// `xy` must hold `2 * n` doubles.
int pf_point_in_polygon(double px, double py, const double *xy, size_t n);

// Camera-frame point (m) for pixel (`u`, `v`) with raw depth `d`.
//
// # Safety
// `intr` must be valid and `out_xyz` must hold 3 doubles.
enum PfStatus pf_backproject(double u,
                             double v,
                             double d,
                             const struct PfIntrinsics *intr,
                             double scale,
                             double *out_xyz);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLANFORGE_H */
