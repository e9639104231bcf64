#include "mp/pose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mp/registration.hpp"
#include "mp/rng.hpp"

namespace mp {

std::vector<Correspondence> build_correspondences(const ImageGrid& nocs_map,
                                                  const ImageGrid& depth,
                                                  const BoolImage& mask,
                                                  const CameraIntrinsics& intrinsics) {
  validate_grid(nocs_map);
  validate_grid(depth);
  if (nocs_map.channels != 3) fail(ErrorCode::InvalidInput, "coordinate map must have 3 channels");
  if (depth.channels != 1) fail(ErrorCode::InvalidInput, "depth map must have 1 channel");
  if (nocs_map.width != depth.width || nocs_map.height != depth.height ||
      mask.width != depth.width || mask.height != depth.height) {
    fail(ErrorCode::InvalidInput, "correspondence inputs differ in size");
  }

  std::vector<Correspondence> out;
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      if (!mask.at(x, y) || !nocs_map.is_valid(x, y) || !depth.is_valid(x, y)) continue;
      Correspondence c;
      c.object_point = Eigen::Vector3d(nocs_map.at(x, y, 0), nocs_map.at(x, y, 1),
                                       nocs_map.at(x, y, 2)) -
                       Eigen::Vector3d(0.5, 0.5, 0.5);
      c.camera_point = backproject_pixel(x + 0.5, y + 0.5, depth.at(x, y), intrinsics);
      c.pixel = {x, y};
      out.push_back(c);
    }
  }
  if (out.empty()) fail(ErrorCode::NoCorrespondences, "no pixel valid in map, depth and mask");
  return out;
}

namespace {

double mean_inlier_residual(const SimilarityTransform& t,
                            std::span<const Correspondence> corr, double threshold,
                            std::vector<int>* inliers) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < corr.size(); ++i) {
    const double r = (t.apply(corr[i].object_point) - corr[i].camera_point).norm();
    if (r < threshold) {
      sum += r;
      ++count;
      if (inliers) inliers->push_back(int(i));
    }
  }
  return count > 0 ? sum / count : std::numeric_limits<double>::infinity();
}

Eigen::Vector3d size_from_points(std::span<const Correspondence> corr,
                                 const std::vector<int>& inliers, double scale) {
  // Needs >= 3 distinct coordinate values per axis for a usable extent; the
  // fallback is the tight box over every correspondence.
  bool enough = true;
  for (int axis = 0; axis < 3 && enough; ++axis) {
    std::set<double> distinct;
    for (int i : inliers) {
      distinct.insert(corr[i].object_point[axis]);
      if (distinct.size() >= 3) break;
    }
    if (distinct.size() < 3) enough = false;
  }

  Eigen::AlignedBox3d box;
  if (enough) {
    for (int i : inliers) box.extend(corr[i].object_point);
  } else {
    for (const auto& c : corr) box.extend(c.object_point);
  }
  return box.sizes() * scale;
}

}  // namespace

PoseEstimate solve_pose(std::span<const Correspondence> correspondences,
                        const RansacConfig& config) {
  if (config.iterations < 1 || !(config.inlier_threshold > 0.0) || config.min_sample < 3) {
    fail(ErrorCode::InvalidInput, "invalid RANSAC configuration");
  }
  const int n = int(correspondences.size());
  if (n < config.min_sample) {
    fail(ErrorCode::DegenerateInput, "fewer correspondences than the minimal sample");
  }

  std::vector<Eigen::Vector3d> src(config.min_sample), dst(config.min_sample);
  int best_count = 0;
  double best_residual = std::numeric_limits<double>::infinity();
  SimilarityTransform best_model;
  bool have_model = false;

  std::vector<int> sample(config.min_sample);
  for (int iter = 0; iter < config.iterations; ++iter) {
    Rng rng = Rng::substream(config.seed, std::uint64_t(iter));
    // Distinct indices by rejection; fine for min_sample << n.
    for (int k = 0; k < config.min_sample; ++k) {
      int idx;
      bool fresh;
      do {
        idx = int(rng.next_below(std::uint64_t(n)));
        fresh = true;
        for (int j = 0; j < k; ++j) fresh &= sample[j] != idx;
      } while (!fresh);
      sample[k] = idx;
    }
    for (int k = 0; k < config.min_sample; ++k) {
      src[k] = correspondences[sample[k]].object_point;
      dst[k] = correspondences[sample[k]].camera_point;
    }

    SimilarityTransform model;
    try {
      model = umeyama_alignment(src, dst, true);
    } catch (const Error&) {
      continue;  // degenerate minimal sample
    }

    std::vector<int> inliers;
    const double residual =
        mean_inlier_residual(model, correspondences, config.inlier_threshold, &inliers);
    const int count = int(inliers.size());
    if (count > best_count || (count == best_count && residual < best_residual)) {
      best_count = count;
      best_residual = residual;
      best_model = model;
      have_model = true;
    }
  }

  if (!have_model || best_count < config.min_sample) {
    fail(ErrorCode::NoConsensus, "no model reached the minimal inlier count");
  }

  // Refit on the winning consensus set.
  std::vector<int> inliers;
  mean_inlier_residual(best_model, correspondences, config.inlier_threshold, &inliers);
  std::vector<Eigen::Vector3d> in_src, in_dst;
  in_src.reserve(inliers.size());
  in_dst.reserve(inliers.size());
  for (int i : inliers) {
    in_src.push_back(correspondences[i].object_point);
    in_dst.push_back(correspondences[i].camera_point);
  }
  PoseEstimate est;
  est.transform = umeyama_alignment(in_src, in_dst, true);
  est.inlier_count = int(inliers.size());
  est.inlier_ratio = double(inliers.size()) / double(n);
  est.size = size_from_points(correspondences, inliers, est.transform.scale);
  return est;
}

RefinedScalars refine_with_sparse_depth(double z_center, double radius,
                                        const ImageGrid& rendered_depth,
                                        const SparseDepthObservation& obs) {
  return refine_with_sparse_depth(z_center, radius, rendered_depth,
                                  std::span<const SparseDepthObservation>(&obs, 1));
}

RefinedScalars refine_with_sparse_depth(double z_center, double radius,
                                        const ImageGrid& rendered_depth,
                                        std::span<const SparseDepthObservation> obs) {
  if (obs.empty()) fail(ErrorCode::InvalidInput, "no sparse depth observations");
  std::vector<double> diffs;
  diffs.reserve(obs.size());
  for (const auto& o : obs) {
    const int x = o.pixel.x(), y = o.pixel.y();
    if (x < 0 || y < 0 || x >= rendered_depth.width || y >= rendered_depth.height ||
        !rendered_depth.is_valid(x, y)) {
      fail(ErrorCode::PixelNotCovered, "rendered depth not valid at the observation pixel");
    }
    if (!(o.depth > 0.0)) fail(ErrorCode::InvalidInput, "observed depth must be positive");
    diffs.push_back(o.depth - double(rendered_depth.at(x, y)));
  }
  std::sort(diffs.begin(), diffs.end());
  const std::size_t m = diffs.size();
  const double offset = (m % 2 == 1) ? diffs[m / 2] : 0.5 * (diffs[m / 2 - 1] + diffs[m / 2]);

  RefinedScalars out;
  out.z_center = z_center + offset;
  if (!(out.z_center > 0.0)) fail(ErrorCode::InvalidInput, "refined center behind the camera");
  out.radius = radius * out.z_center / z_center;
  return out;
}

std::optional<SparseDepthObservation> pick_sparse_observation(const ImageGrid& rendered,
                                                              const ImageGrid& observed,
                                                              const BoundingBox2D& bbox) {
  if (rendered.width != observed.width || rendered.height != observed.height) {
    fail(ErrorCode::InvalidInput, "depth maps differ in size");
  }
  BoolImage both = BoolImage::make(rendered.width, rendered.height, false);
  for (int y = 0; y < rendered.height; ++y) {
    for (int x = 0; x < rendered.width; ++x) {
      both.set(x, y, rendered.is_valid(x, y) && observed.is_valid(x, y));
    }
  }
  if (both.count() == 0) return std::nullopt;

  // Peel the region until just before it disappears; survivors are interior.
  BoolImage interior = both;
  for (int round = 0; round < 6; ++round) {
    BoolImage next = erode(interior, 1.0);
    if (next.count() == 0) break;
    interior = std::move(next);
  }

  const Eigen::Vector2d center = bbox.center();
  SparseDepthObservation obs;
  double best = std::numeric_limits<double>::infinity();
  for (int y = 0; y < interior.height; ++y) {
    for (int x = 0; x < interior.width; ++x) {
      if (!interior.at(x, y)) continue;
      const double d = (Eigen::Vector2d(x + 0.5, y + 0.5) - center).squaredNorm();
      if (d < best) {
        best = d;
        obs.pixel = {x, y};
      }
    }
  }
  obs.depth = observed.at(obs.pixel.x(), obs.pixel.y());
  return obs;
}

EstimateResult estimate_object(const LiftInputs& inputs, const ImageGrid& nocs_map,
                               const BoolImage& mask, const RansacConfig& config,
                               const SparseDepthObservation* observation, int threads) {
  LiftInputs lift_in = inputs;
  TriangleMesh metric = lift_to_metric(lift_in);
  ImageGrid depth = render_depth(metric, lift_in.intrinsics, threads);

  if (observation) {
    const RefinedScalars refined =
        refine_with_sparse_depth(lift_in.z_center, lift_in.radius, depth, *observation);
    lift_in.z_center = refined.z_center;
    lift_in.radius = refined.radius;
    metric = lift_to_metric(lift_in);
    depth = render_depth(metric, lift_in.intrinsics, threads);
  }

  const auto corr = build_correspondences(nocs_map, depth, mask, lift_in.intrinsics);

  EstimateResult out;
  out.pose = solve_pose(corr, config);
  out.metric_mesh = std::move(metric);
  out.rendered_depth = std::move(depth);
  out.z_center = lift_in.z_center;
  out.radius = lift_in.radius;
  return out;
}

}  // namespace mp
