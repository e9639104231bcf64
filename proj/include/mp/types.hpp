#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mp/error.hpp"

namespace mp {

enum class MeshFrame { Normalized, CameraMetric };

/// Indexed triangle mesh. Normalized meshes are dimensionless, centered so
/// their bounding sphere sits at the origin with radius 0.5; camera-metric
/// meshes are in meters in the camera frame.
struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;
  MeshFrame frame = MeshFrame::Normalized;

  Eigen::AlignedBox3d bounds() const;
  double max_radius_about_origin() const;
};

/// Throws InvalidInput on out-of-range/duplicate face indices or a normalized
/// mesh whose bounding-sphere radius about the origin exceeds 0.5 + 1e-9.
void validate_mesh(const TriangleMesh& mesh);

/// Center of a near-minimal enclosing sphere (Ritter seed + iterative
/// refinement; deterministic).
Eigen::Vector3d bounding_sphere_center(std::span<const Eigen::Vector3d> points);

/// Recenter on the bounding-sphere center and rescale so the farthest vertex
/// lies at radius 0.5; tags the result Normalized.
TriangleMesh normalize_mesh(const TriangleMesh& mesh);

/// True iff some edge belongs to exactly one triangle.
bool has_boundary_edges(const TriangleMesh& mesh);

struct CameraIntrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;

  /// Single focal length used by the patch-resize compensation; fx by convention.
  double focal() const { return fx; }

  Eigen::Vector2d project(const Eigen::Vector3d& p) const {
    return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
  }
};

void validate_intrinsics(const CameraIntrinsics& k);

bool is_rotation(const Eigen::Matrix3d& r, double tol = 1e-9);

/// p -> scale * rotation * p + translation.
struct SimilarityTransform {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return scale * (rotation * p) + translation;
  }

  /// this ∘ inner: apply `inner` first.
  SimilarityTransform compose(const SimilarityTransform& inner) const;
  SimilarityTransform inverse() const;
};

TriangleMesh transform_mesh(const TriangleMesh& mesh, const SimilarityTransform& t,
                            MeshFrame frame);

void validate_similarity(const SimilarityTransform& t, double tol = 1e-9);

/// Axis-aligned image-space box; x,y is the top-left corner, in pixels.
struct BoundingBox2D {
  double x = 0, y = 0, w = 0, h = 0;

  double longer_side() const { return w > h ? w : h; }
  Eigen::Vector2d center() const { return {x + 0.5 * w, y + 0.5 * h}; }
};

struct OrientedBox3D {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d half_extents = Eigen::Vector3d::Ones();

  bool contains(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d q = rotation.transpose() * (p - center);
    return std::abs(q.x()) <= half_extents.x() && std::abs(q.y()) <= half_extents.y() &&
           std::abs(q.z()) <= half_extents.z();
  }

  double volume() const { return 8.0 * half_extents.prod(); }
  std::array<Eigen::Vector3d, 8> corners() const;
};

void validate_box3d(const OrientedBox3D& box);

}  // namespace mp
