#pragma once

#include "mp/types.hpp"

namespace mp {

/// Network input patch size in pixels; detected boxes are resized square to
/// this before shape/center prediction.
inline constexpr double kDefaultPatchSize = 192.0;

/// Patch-normalized center/radius scalars as a predictor would emit them.
struct NoceScalars {
  double z_noce = 0.0;   // dimensionless normalized object center
  double r_norm = 0.0;   // dimensionless normalized radius
  double tau = 1.0;      // resize ratio H_o / H_patch
  double h_patch = kDefaultPatchSize;
};

/// Resize ratio tau = max(bbox.w, bbox.h) / h_patch. Throws InvalidBox on a
/// degenerate box.
double resize_ratio(const BoundingBox2D& bbox, double h_patch = kDefaultPatchSize);

/// Object center depth -> patch-normalized value: z * tau / f, removing the
/// crop-and-resize depth ambiguity. f is intrinsics.fx.
double noce_normalize(double z_center, const BoundingBox2D& bbox, double h_patch,
                      const CameraIntrinsics& intrinsics);

/// Exact inverse of noce_normalize: z_noce * f / tau.
double noce_denormalize(double z_noce, const BoundingBox2D& bbox, double h_patch,
                        const CameraIntrinsics& intrinsics);

/// Object radius is trained relative to depth: r_norm = radius / z.
double radius_normalize(double radius, double z_center);

/// radius = r_norm * z.
double radius_denormalize(double r_norm, double z_center);

}  // namespace mp
