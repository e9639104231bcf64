// Independent reference implementations used only to check the library.
// These deliberately take different computational routes than the code under
// test (ray casting instead of rasterization, quaternions instead of traces,
// exhaustive scans instead of trees).
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "mp/types.hpp"

namespace oracle {

// Moller-Trumbore ray/triangle intersection; returns the ray parameter t for
// ray origin + t*dir, or nullopt on a miss.
inline std::optional<double> ray_triangle(const Eigen::Vector3d& origin,
                                          const Eigen::Vector3d& dir,
                                          const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                          const Eigen::Vector3d& c) {
  const Eigen::Vector3d e1 = b - a;
  const Eigen::Vector3d e2 = c - a;
  const Eigen::Vector3d p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Eigen::Vector3d s = origin - a;
  const double u = s.dot(p) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Eigen::Vector3d q = s.cross(e1);
  const double v = dir.dot(q) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(q) * inv_det;
  return t > 0.0 ? std::optional<double>(t) : std::nullopt;
}

// Depth of the nearest surface along the ray through pixel center (px, py),
// or nullopt when the ray misses every triangle.
inline std::optional<double> ray_cast_depth(const mp::TriangleMesh& mesh,
                                            const mp::CameraIntrinsics& k, int px, int py) {
  const Eigen::Vector3d dir((px + 0.5 - k.cx) / k.fx, (py + 0.5 - k.cy) / k.fy, 1.0);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : mesh.faces) {
    const auto t = ray_triangle(Eigen::Vector3d::Zero(), dir, mesh.vertices[f[0]],
                                mesh.vertices[f[1]], mesh.vertices[f[2]]);
    if (t && *t < best) best = *t;
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;  // dir.z == 1, so the parameter is the camera depth
}

inline double quaternion_angle_deg(const Eigen::Matrix3d& ra, const Eigen::Matrix3d& rb) {
  const Eigen::Quaterniond qa(ra), qb(rb);
  const double d = std::min(1.0, std::abs(qa.dot(qb)));
  return 2.0 * std::acos(d) * 180.0 / M_PI;
}

inline double brute_force_chamfer(std::span<const Eigen::Vector3d> a,
                                  std::span<const Eigen::Vector3d> b) {
  auto one_way = [](std::span<const Eigen::Vector3d> from, std::span<const Eigen::Vector3d> to) {
    double sum = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, (p - q).squaredNorm());
      sum += best;
    }
    return sum / double(from.size());
  };
  return one_way(a, b) + one_way(b, a);
}

inline double point_triangle_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                      const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  // Ericson's closest-point-on-triangle.
  const Eigen::Vector3d ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();
  const Eigen::Vector3d bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return (p - (a + v * ab)).norm();
  }
  const Eigen::Vector3d cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return (p - (a + w * ac)).norm();
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + w * (c - b))).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return (p - (a + ab * v + ac * w)).norm();
}

inline double point_mesh_distance(const Eigen::Vector3d& p, const mp::TriangleMesh& mesh) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : mesh.faces) {
    best = std::min(best, point_triangle_distance(p, mesh.vertices[f[0]], mesh.vertices[f[1]],
                                                  mesh.vertices[f[2]]));
  }
  return best;
}

// Explicit 4x4 homogeneous evaluation of a similarity transform.
inline Eigen::Vector3d apply_via_matrix(const mp::SimilarityTransform& t,
                                        const Eigen::Vector3d& p) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = t.scale * t.rotation;
  m.topRightCorner<3, 1>() = t.translation;
  const Eigen::Vector4d q = m * p.homogeneous();
  return q.head<3>() / q.w();
}

}  // namespace oracle
