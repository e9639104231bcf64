#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mp/raster.hpp"
#include "mp/types.hpp"

namespace mp {

/// Knobs for the parametric category shapes, relative to per-category
/// default proportions.
struct ShapeParams {
  double aspect = 1.0;  // vertical stretch
  double detail = 1.0;  // secondary feature size (handle, rim, ...)
};

const std::vector<std::string>& category_names();

/// Parametric canonical shape, normalized to bounding-sphere radius 0.5 about
/// the origin, up = +y. bottle/can are capped cylinders (closed), bowl an
/// open hemisphere, laptop/camera boxes, mug a cylinder with a torus handle.
/// Throws UnknownCategory for anything outside the six-category table.
TriangleMesh make_category_mesh(const std::string& category, const ShapeParams& params = {},
                                int subdivisions = 32);

struct SceneObject {
  std::string category;
  ShapeParams params;
  int subdivisions = 32;
  SimilarityTransform gt_pose;  // canonical normalized frame -> camera
};

struct SceneSpec {
  std::uint64_t seed = 0;
  std::vector<SceneObject> objects;
  CameraIntrinsics intrinsics;
};

/// Placement sampler: centers at z in [0.6, 3.0] m, laterally placed so the
/// full bounding sphere stays in view with margin, silhouettes pairwise
/// disjoint. Deterministic under seed.
SceneSpec sample_scene(std::uint64_t seed, const CameraIntrinsics& intrinsics,
                       int min_objects = 1, int max_objects = 3, int subdivisions = 32);

/// Per-object oracle outputs. The depth/coordinate maps are full-frame with
/// validity restricted to the pixels this object wins under joint occlusion.
struct GroundTruthObject {
  int object_index = -1;
  TriangleMesh input_mesh;  // view-aligned normalized mesh (pose rotation applied)
  ImageGrid depth;          // observed depth for this object's visible pixels
  ImageGrid nocs;           // canonical coordinates + 0.5, 3 channels
  BoolImage mask;           // visible-pixel mask
  BoundingBox2D bbox;       // tight box of the visible mask
  // Same size as bbox but centered on the projected object center: what a
  // center-calibrated detector would report. A raw mask box's center ray
  // misses the object center by the silhouette asymmetry, which would leak a
  // lateral offset into the lift; the oracle keeps that error out (the
  // perturbation model reintroduces detector error explicitly).
  BoundingBox2D detector_bbox;
  double z_center = 0.0;    // camera z of the bounding-sphere center
  double radius = 0.0;      // metric bounding-sphere radius (= scale / 2)
  SimilarityTransform gt_pose;
  std::string category;
};

/// Renders every object with inter-object occlusion. Fully occluded objects
/// yield nullopt (nothing of them is visible to render).
std::vector<std::optional<GroundTruthObject>> render_ground_truth(const SceneSpec& scene,
                                                                  int threads = 1);

/// Predictor-error model: relative noise on the center/radius scalars,
/// additive Gaussian noise and uniform outliers on the coordinate map, and
/// mask erosion. Zero spec returns the bundle unchanged.
struct PerturbationSpec {
  double z_rel_noise = 0.0;
  double r_rel_noise = 0.0;
  double nocs_noise_sigma = 0.0;
  double nocs_outlier_frac = 0.0;
  double mask_erosion_px = 0.0;
};

GroundTruthObject perturb(const GroundTruthObject& bundle, const PerturbationSpec& spec,
                          std::uint64_t seed);

}  // namespace mp
