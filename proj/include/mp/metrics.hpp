#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mp/raster.hpp"
#include "mp/types.hpp"

namespace mp {

/// Volumetric IoU of two oriented boxes. A deterministic lattice of
/// resolution^3 cell centers over the shared axis-aligned bounds is used;
/// when both rotations are the identity the exact axis-aligned overlap is
/// returned instead. Symmetric in its arguments by construction.
double iou3d(const OrientedBox3D& a, const OrientedBox3D& b, int resolution = 64);

/// Categories whose shape is rotationally symmetric about the object-frame
/// +y axis; rotation error for these ignores spin about that axis.
struct SymmetryTable {
  std::set<std::string> categories{"bottle", "bowl", "can"};
  bool is_symmetric(const std::string& category) const {
    return categories.count(category) != 0;
  }
};

struct PoseErrors {
  double rotation_deg = 0.0;
  double translation_cm = 0.0;
};

/// Rotation/translation error between two similarity transforms. Symmetric
/// categories use the angle between the transformed symmetry axes, i.e. the
/// minimum over all spins about +y, in closed form.
PoseErrors pose_errors(const SimilarityTransform& pred, const SimilarityTransform& gt,
                       const std::string& category, const SymmetryTable& symmetry = {});

struct DetectionRecord {
  std::string image_id;
  std::string category;
  double score = 1.0;
  OrientedBox3D box3d;
  SimilarityTransform pose;
  std::shared_ptr<const TriangleMesh> mesh;  // optional; not used by AP itself
};

/// Evaluation box for a detection: the tight box of the mesh in the pose's
/// rotation-removed frame, scaled and placed by the pose. Identical records
/// always produce identical boxes, so ground truth evaluated against itself
/// scores perfectly.
OrientedBox3D detection_box(const TriangleMesh& mesh, const SimilarityTransform& pose);

/// True-positive criterion for average precision.
struct ApCriterion {
  enum class Kind { Iou, Pose };
  Kind kind = Kind::Iou;
  double iou_threshold = 0.25;                 // Kind::Iou
  std::optional<double> max_rotation_deg;      // Kind::Pose
  std::optional<double> max_translation_cm;    // Kind::Pose

  static ApCriterion iou(double threshold);
  static ApCriterion pose(std::optional<double> deg, std::optional<double> cm);
  bool passes(double iou, const PoseErrors& errors) const;
  std::string name() const;
};

/// Result of criterion-independent greedy matching: predictions in descending
/// score claim the unmatched ground truth of their image/category with the
/// highest IoU (>= min_iou). Pair errors are cached for criterion checks.
struct MatchedDetection {
  int pred_index = -1;
  int gt_index = -1;  // -1 when unmatched
  double iou = 0.0;
  PoseErrors errors;
};

std::vector<MatchedDetection> match_detections(std::span<const DetectionRecord> preds,
                                               std::span<const DetectionRecord> gts,
                                               const SymmetryTable& symmetry = {},
                                               double min_iou = 0.1,
                                               int iou_resolution = 64);

/// Mean over categories of the all-point-interpolated area under the
/// precision-recall curve. Throws EmptyGroundTruth when gts is empty.
double detection_ap(std::span<const DetectionRecord> preds,
                    std::span<const DetectionRecord> gts, const ApCriterion& criterion,
                    const SymmetryTable& symmetry = {}, double min_iou = 0.1,
                    int iou_resolution = 64);

/// Same, reusing a precomputed matching (matching does not depend on the
/// criterion, so one match serves every threshold).
double detection_ap_from_match(std::span<const MatchedDetection> matches,
                               std::span<const DetectionRecord> preds,
                               std::span<const DetectionRecord> gts,
                               const ApCriterion& criterion);

inline constexpr int kSurfaceSampleCount = 10000;

struct SurfaceSample {
  Eigen::Vector3d position;
  Eigen::Vector3d normal;  // unit face normal
};

/// Area-weighted random surface samples; deterministic under seed.
std::vector<SurfaceSample> sample_surface(const TriangleMesh& mesh, int count,
                                          std::uint64_t seed);

/// Symmetric mean squared nearest-neighbor distance between two point sets
/// (raw value; reports usually scale it by 1e3).
double chamfer_distance(std::span<const Eigen::Vector3d> a,
                        std::span<const Eigen::Vector3d> b);

/// Mean absolute cosine between each sample's normal and its nearest
/// neighbor's normal, averaged over both directions; in [0, 1], higher better.
double normal_consistency(std::span<const SurfaceSample> a,
                          std::span<const SurfaceSample> b);

/// Depth-map agreement over pixels valid in both grids.
struct DepthMetrics {
  double rmse = 0.0;                // sqrt(mean squared error), meters
  double rel = 0.0;                 // mean |pred - gt| / gt
  std::map<double, double> delta;   // tau -> percent of pixels within ratio tau
  long pixels = 0;                  // pixels valid in both grids
};

inline const double kDeltaThresholds[3] = {1.25, 1.25 * 1.25, 1.25 * 1.25 * 1.25};

DepthMetrics depth_metrics(const ImageGrid& pred, const ImageGrid& gt);

/// Aggregated evaluation over a dataset.
struct MetricReport {
  std::map<double, double> iou_ap;                       // IoU threshold -> percent
  std::vector<std::pair<ApCriterion, double>> pose_ap;   // criterion -> percent
  double chamfer_mean_x1e3 = 0.0;
  double normal_consistency = 0.0;
  DepthMetrics depth;
  int num_images = 0;
  int num_ground_truth = 0;
  int num_predictions = 0;
};

}  // namespace mp
