#include "mp/noce.hpp"

namespace mp {

double resize_ratio(const BoundingBox2D& bbox, double h_patch) {
  if (!(bbox.w > 0.0) || !(bbox.h > 0.0)) fail(ErrorCode::InvalidBox, "degenerate bounding box");
  if (!(h_patch > 0.0)) fail(ErrorCode::InvalidInput, "patch size must be positive");
  return bbox.longer_side() / h_patch;
}

double noce_normalize(double z_center, const BoundingBox2D& bbox, double h_patch,
                      const CameraIntrinsics& intrinsics) {
  if (!(z_center > 0.0)) fail(ErrorCode::InvalidInput, "object center depth must be positive");
  return z_center * resize_ratio(bbox, h_patch) / intrinsics.focal();
}

double noce_denormalize(double z_noce, const BoundingBox2D& bbox, double h_patch,
                        const CameraIntrinsics& intrinsics) {
  if (!(z_noce > 0.0)) fail(ErrorCode::InvalidInput, "normalized center must be positive");
  return z_noce * intrinsics.focal() / resize_ratio(bbox, h_patch);
}

double radius_normalize(double radius, double z_center) {
  if (!(radius > 0.0) || !(z_center > 0.0)) {
    fail(ErrorCode::InvalidInput, "radius and depth must be positive");
  }
  return radius / z_center;
}

double radius_denormalize(double r_norm, double z_center) {
  if (!(r_norm > 0.0) || !(z_center > 0.0)) {
    fail(ErrorCode::InvalidInput, "radius and depth must be positive");
  }
  return r_norm * z_center;
}

}  // namespace mp
