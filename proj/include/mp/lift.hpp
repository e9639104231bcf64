#pragma once

#include "mp/types.hpp"

namespace mp {

/// Pinhole inversion: pixel (u, v) at camera depth d -> camera-frame point.
inline Eigen::Vector3d backproject_pixel(double u, double v, double depth,
                                         const CameraIntrinsics& k) {
  return {(u - k.cx) * depth / k.fx, (v - k.cy) * depth / k.fy, depth};
}

/// Everything needed to lift a normalized mesh to metric camera coordinates.
struct LiftInputs {
  TriangleMesh mesh;  // frame must be Normalized
  BoundingBox2D bbox;
  double z_center = 0.0;  // meters
  double radius = 0.0;    // meters, metric bounding-sphere radius
  CameraIntrinsics intrinsics;
};

void validate_lift_inputs(const LiftInputs& in);

/// The scale/translate transform taking normalized coordinates into metric
/// camera coordinates, solved from corner correspondences between the
/// normalized box [-0.5, 0.5]^3 and a camera-frame box centered at the
/// back-projected bbox center with inscribed-sphere radius `radius`.
/// Equals (s = 2*radius, R = I, t = backproject(bbox center, z)) up to
/// solver round-off.
SimilarityTransform lift_transform(const LiftInputs& in);

/// Applies lift_transform to every vertex; result is tagged CameraMetric and
/// keeps bounding-sphere radius == in.radius (for an exactly normalized mesh).
TriangleMesh lift_to_metric(const LiftInputs& in);

}  // namespace mp
