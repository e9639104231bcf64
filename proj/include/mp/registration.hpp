#pragma once

#include <span>

#include "mp/types.hpp"

namespace mp {

/// Least-squares similarity alignment (Umeyama): minimizes
/// sum_i ||s*R*source_i + t - target_i||^2 over proper rotations, with the
/// determinant-sign correction so reflections are never returned.
/// with_scale=false pins s = 1. Throws DegenerateInput when fewer than three
/// points are given or the source covariance has rank < 2.
SimilarityTransform umeyama_alignment(std::span<const Eigen::Vector3d> source,
                                      std::span<const Eigen::Vector3d> target,
                                      bool with_scale = true);

/// Geodesic angle between two proper rotations, in degrees in [0, 180].
/// Throws NotARotation if either input fails the orthonormality check (1e-6).
double rotation_geodesic_deg(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

}  // namespace mp
