#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mp/lift.hpp"
#include "mp/raster.hpp"
#include "mp/types.hpp"

namespace mp {

/// One object-coordinate / camera-point pair. object_point is the map value
/// re-centered to [-0.5, 0.5]^3; camera_point is the back-projected depth.
struct Correspondence {
  Eigen::Vector3d object_point;
  Eigen::Vector3d camera_point;
  Eigen::Vector2i pixel;
};

/// Pairs every pixel valid in the coordinate map, the depth map, and the mask.
/// Throws NoCorrespondences when the intersection is empty.
std::vector<Correspondence> build_correspondences(const ImageGrid& nocs_map,
                                                  const ImageGrid& depth,
                                                  const BoolImage& mask,
                                                  const CameraIntrinsics& intrinsics);

struct RansacConfig {
  int iterations = 256;
  double inlier_threshold = 0.01;  // meters
  int min_sample = 4;
  std::uint64_t seed = 0;
};

struct PoseEstimate {
  SimilarityTransform transform;
  Eigen::Vector3d size = Eigen::Vector3d::Zero();  // per-axis metric extents
  int inlier_count = 0;
  double inlier_ratio = 0.0;
};

/// RANSAC + least-squares similarity fit. Iteration i draws its minimal
/// sample from an independent substream of (seed, i), so results do not
/// depend on evaluation order. The best model (most inliers, ties by lower
/// mean inlier residual) is refit on all its inliers. size is the per-axis
/// extent of the inlier object points' tight box scaled by s, falling back to
/// the tight box over all correspondences when inliers span < 3 distinct
/// values on some axis.
PoseEstimate solve_pose(std::span<const Correspondence> correspondences,
                        const RansacConfig& config);

struct SparseDepthObservation {
  Eigen::Vector2i pixel = Eigen::Vector2i::Zero();
  double depth = 0.0;  // meters
};

struct RefinedScalars {
  double z_center = 0.0;
  double radius = 0.0;
};

/// One-pixel depth correction: shifts the object center by the observed
/// minus rendered depth at the observation pixel and rescales the radius
/// proportionally (radius predictions are tied to depth).
/// Throws PixelNotCovered when the rendered depth is invalid there.
RefinedScalars refine_with_sparse_depth(double z_center, double radius,
                                        const ImageGrid& rendered_depth,
                                        const SparseDepthObservation& obs);

/// Multi-observation extension: the depth offset is the median of the
/// per-pixel differences.
RefinedScalars refine_with_sparse_depth(double z_center, double radius,
                                        const ImageGrid& rendered_depth,
                                        std::span<const SparseDepthObservation> obs);

/// Chooses the pixel a sparse depth return should be read at: covered in
/// both the rendered and the observed depth map, well inside that region
/// (away from silhouettes, where one-pixel depth lookups are unstable), and
/// as close to the box center ray as possible. Returns nullopt when the two
/// coverages do not intersect. The observation depth is taken from
/// `observed`.
std::optional<SparseDepthObservation> pick_sparse_observation(const ImageGrid& rendered,
                                                              const ImageGrid& observed,
                                                              const BoundingBox2D& bbox);

struct EstimateResult {
  PoseEstimate pose;
  TriangleMesh metric_mesh;  // final lifted mesh
  ImageGrid rendered_depth;  // final rendered depth
  double z_center = 0.0;     // center depth used for the final lift
  double radius = 0.0;       // radius used for the final lift
};

/// Full per-object pipeline: lift -> render -> (optional one-pixel refinement,
/// then re-lift and re-render) -> correspondences -> pose solve.
EstimateResult estimate_object(const LiftInputs& inputs, const ImageGrid& nocs_map,
                               const BoolImage& mask, const RansacConfig& config,
                               const SparseDepthObservation* observation = nullptr,
                               int threads = 1);

}  // namespace mp
