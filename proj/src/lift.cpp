#include "mp/lift.hpp"

#include "mp/registration.hpp"

namespace mp {

void validate_lift_inputs(const LiftInputs& in) {
  if (in.mesh.frame != MeshFrame::Normalized) {
    fail(ErrorCode::InvalidInput, "lift expects a normalized mesh");
  }
  validate_mesh(in.mesh);
  validate_intrinsics(in.intrinsics);
  if (!(in.z_center > 0.0)) fail(ErrorCode::InvalidInput, "object center depth must be positive");
  if (!(in.radius > 0.0)) fail(ErrorCode::InvalidInput, "object radius must be positive");
  if (!(in.bbox.w > 0.0) || !(in.bbox.h > 0.0)) fail(ErrorCode::InvalidBox, "degenerate bounding box");
}

SimilarityTransform lift_transform(const LiftInputs& in) {
  validate_lift_inputs(in);
  const Eigen::Vector2d c2 = in.bbox.center();
  const Eigen::Vector3d center = backproject_pixel(c2.x(), c2.y(), in.z_center, in.intrinsics);

  // Corner correspondences between the normalized box and the camera-frame
  // box whose inscribed sphere has the predicted metric radius.
  std::vector<Eigen::Vector3d> src, dst;
  src.reserve(8);
  dst.reserve(8);
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) {
        src.emplace_back(0.5 * sx, 0.5 * sy, 0.5 * sz);
        dst.emplace_back(center + in.radius * Eigen::Vector3d(sx, sy, sz));
      }
  return umeyama_alignment(src, dst, /*with_scale=*/true);
}

TriangleMesh lift_to_metric(const LiftInputs& in) {
  return transform_mesh(in.mesh, lift_transform(in), MeshFrame::CameraMetric);
}

}  // namespace mp
