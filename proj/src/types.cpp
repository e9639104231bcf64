#include "mp/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mp {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::NotARotation: return "NotARotation";
    case ErrorCode::InvalidBox: return "InvalidBox";
    case ErrorCode::EmptyRender: return "EmptyRender";
    case ErrorCode::NoCorrespondences: return "NoCorrespondences";
    case ErrorCode::NoConsensus: return "NoConsensus";
    case ErrorCode::PixelNotCovered: return "PixelNotCovered";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::NoValidPixels: return "NoValidPixels";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

Eigen::AlignedBox3d TriangleMesh::bounds() const {
  Eigen::AlignedBox3d box;
  for (const auto& v : vertices) box.extend(v);
  return box;
}

double TriangleMesh::max_radius_about_origin() const {
  double r2 = 0.0;
  for (const auto& v : vertices) r2 = std::max(r2, v.squaredNorm());
  return std::sqrt(r2);
}

void validate_mesh(const TriangleMesh& mesh) {
  const int n = int(mesh.vertices.size());
  for (const auto& f : mesh.faces) {
    for (int i : f) {
      if (i < 0 || i >= n) fail(ErrorCode::InvalidInput, "face index out of range");
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      fail(ErrorCode::InvalidInput, "face with repeated vertex index");
    }
  }
  if (mesh.frame == MeshFrame::Normalized && !mesh.vertices.empty()) {
    if (mesh.max_radius_about_origin() > 0.5 + 1e-9) {
      fail(ErrorCode::InvalidInput, "normalized mesh exceeds bounding-sphere radius 0.5");
    }
  }
}

Eigen::Vector3d bounding_sphere_center(std::span<const Eigen::Vector3d> points) {
  if (points.empty()) return Eigen::Vector3d::Zero();

  auto farthest_from = [&](const Eigen::Vector3d& c) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double d = (points[i] - c).squaredNorm();
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };

  // Ritter seed: a diameter-ish pair.
  const Eigen::Vector3d& p = points[farthest_from(points[0])];
  const Eigen::Vector3d& q = points[farthest_from(p)];
  Eigen::Vector3d center = 0.5 * (p + q);

  // Badoiu-Clarkson refinement toward the 1-center optimum.
  for (int k = 1; k <= 2000; ++k) {
    const Eigen::Vector3d& f = points[farthest_from(center)];
    center += (f - center) / double(k + 1);
  }
  return center;
}

TriangleMesh normalize_mesh(const TriangleMesh& mesh) {
  TriangleMesh out = mesh;
  out.frame = MeshFrame::Normalized;
  if (mesh.vertices.empty()) return out;
  const Eigen::Vector3d c = bounding_sphere_center(mesh.vertices);
  double r = 0.0;
  for (const auto& v : mesh.vertices) r = std::max(r, (v - c).norm());
  const double s = r > 0.0 ? 0.5 / r : 1.0;
  for (auto& v : out.vertices) v = (v - c) * s;
  // Rounding can leave the farthest vertex a hair past 0.5; renormalize once.
  const double rr = out.max_radius_about_origin();
  if (rr > 0.5) {
    const double fix = 0.5 / rr;
    for (auto& v : out.vertices) v *= fix;
  }
  return out;
}

bool has_boundary_edges(const TriangleMesh& mesh) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      int a = f[e], b = f[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++count[{a, b}];
    }
  }
  for (const auto& [edge, c] : count) {
    if (c == 1) return true;
  }
  return false;
}

void validate_intrinsics(const CameraIntrinsics& k) {
  if (!(k.fx > 0.0) || !(k.fy > 0.0)) fail(ErrorCode::InvalidInput, "focal lengths must be positive");
  if (k.width <= 0 || k.height <= 0) fail(ErrorCode::InvalidInput, "image size must be positive");
  if (k.cx < 0.0 || k.cx >= k.width || k.cy < 0.0 || k.cy >= k.height) {
    fail(ErrorCode::InvalidInput, "principal point outside image");
  }
}

bool is_rotation(const Eigen::Matrix3d& r, double tol) {
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

SimilarityTransform SimilarityTransform::compose(const SimilarityTransform& inner) const {
  SimilarityTransform out;
  out.scale = scale * inner.scale;
  out.rotation = rotation * inner.rotation;
  out.translation = scale * (rotation * inner.translation) + translation;
  return out;
}

SimilarityTransform SimilarityTransform::inverse() const {
  SimilarityTransform out;
  out.scale = 1.0 / scale;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation) / scale;
  return out;
}

TriangleMesh transform_mesh(const TriangleMesh& mesh, const SimilarityTransform& t,
                            MeshFrame frame) {
  TriangleMesh out;
  out.faces = mesh.faces;
  out.frame = frame;
  out.vertices.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices) out.vertices.push_back(t.apply(v));
  return out;
}

void validate_similarity(const SimilarityTransform& t, double tol) {
  if (!(t.scale > 0.0)) fail(ErrorCode::InvalidInput, "similarity scale must be positive");
  if (!is_rotation(t.rotation, tol)) fail(ErrorCode::NotARotation, "rotation is not orthonormal");
}

std::array<Eigen::Vector3d, 8> OrientedBox3D::corners() const {
  std::array<Eigen::Vector3d, 8> out;
  int idx = 0;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) {
        const Eigen::Vector3d local(sx * half_extents.x(), sy * half_extents.y(),
                                    sz * half_extents.z());
        out[idx++] = center + rotation * local;
      }
  return out;
}

void validate_box3d(const OrientedBox3D& box) {
  if (!is_rotation(box.rotation, 1e-9)) fail(ErrorCode::NotARotation, "box rotation invalid");
  if (!(box.half_extents.minCoeff() > 0.0)) {
    fail(ErrorCode::InvalidInput, "box half-extents must be positive");
  }
}

}  // namespace mp
