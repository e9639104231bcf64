#include "mp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mp/kdtree.hpp"
#include "mp/registration.hpp"
#include "mp/rng.hpp"

namespace mp {

namespace {

bool is_identity(const Eigen::Matrix3d& r) {
  return (r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12;
}

double axis_aligned_iou(const OrientedBox3D& a, const OrientedBox3D& b) {
  double inter = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double lo = std::max(a.center[i] - a.half_extents[i], b.center[i] - b.half_extents[i]);
    const double hi = std::min(a.center[i] + a.half_extents[i], b.center[i] + b.half_extents[i]);
    if (hi <= lo) return 0.0;
    inter *= hi - lo;
  }
  const double uni = a.volume() + b.volume() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace

double iou3d(const OrientedBox3D& a, const OrientedBox3D& b, int resolution) {
  validate_box3d(a);
  validate_box3d(b);
  if (resolution < 2) fail(ErrorCode::InvalidInput, "iou3d resolution too small");
  if (is_identity(a.rotation) && is_identity(b.rotation)) return axis_aligned_iou(a, b);

  // Shared lattice over the union's axis-aligned bounds; the bounds are
  // symmetric in (a, b), so iou3d(a, b) == iou3d(b, a) exactly.
  Eigen::AlignedBox3d bounds;
  for (const auto& c : a.corners()) bounds.extend(c);
  for (const auto& c : b.corners()) bounds.extend(c);

  const Eigen::Vector3d lo = bounds.min();
  const Eigen::Vector3d step = bounds.sizes() / double(resolution);
  long both = 0, either = 0;
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      for (int k = 0; k < resolution; ++k) {
        const Eigen::Vector3d p = lo + Eigen::Vector3d((i + 0.5) * step.x(), (j + 0.5) * step.y(),
                                                       (k + 0.5) * step.z());
        const bool in_a = a.contains(p);
        const bool in_b = b.contains(p);
        both += in_a && in_b;
        either += in_a || in_b;
      }
    }
  }
  return either > 0 ? double(both) / double(either) : 0.0;
}

PoseErrors pose_errors(const SimilarityTransform& pred, const SimilarityTransform& gt,
                       const std::string& category, const SymmetryTable& symmetry) {
  if (!is_rotation(pred.rotation, 1e-6) || !is_rotation(gt.rotation, 1e-6)) {
    fail(ErrorCode::NotARotation, "pose rotation is not orthonormal");
  }
  PoseErrors out;
  out.translation_cm = (pred.translation - gt.translation).norm() * 100.0;
  if (symmetry.is_symmetric(category)) {
    const Eigen::Vector3d axis(0.0, 1.0, 0.0);
    const double c = (pred.rotation * axis).dot(gt.rotation * axis);
    out.rotation_deg = std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / M_PI;
  } else {
    out.rotation_deg = rotation_geodesic_deg(pred.rotation, gt.rotation);
  }
  return out;
}

ApCriterion ApCriterion::iou(double threshold) {
  ApCriterion c;
  c.kind = Kind::Iou;
  c.iou_threshold = threshold;
  return c;
}

ApCriterion ApCriterion::pose(std::optional<double> deg, std::optional<double> cm) {
  ApCriterion c;
  c.kind = Kind::Pose;
  c.max_rotation_deg = deg;
  c.max_translation_cm = cm;
  return c;
}

bool ApCriterion::passes(double iou, const PoseErrors& errors) const {
  if (kind == Kind::Iou) return iou >= iou_threshold;
  if (max_rotation_deg && !(errors.rotation_deg < *max_rotation_deg)) return false;
  if (max_translation_cm && !(errors.translation_cm < *max_translation_cm)) return false;
  return true;
}

std::string ApCriterion::name() const {
  char buf[64];
  if (kind == Kind::Iou) {
    std::snprintf(buf, sizeof(buf), "iou_%g", iou_threshold);
    return buf;
  }
  std::string out;
  if (max_rotation_deg) {
    std::snprintf(buf, sizeof(buf), "%gdeg", *max_rotation_deg);
    out += buf;
  }
  if (max_translation_cm) {
    if (!out.empty()) out += "_";
    std::snprintf(buf, sizeof(buf), "%gcm", *max_translation_cm);
    out += buf;
  }
  return out.empty() ? "any" : out;
}

OrientedBox3D detection_box(const TriangleMesh& mesh, const SimilarityTransform& pose) {
  if (mesh.vertices.empty()) fail(ErrorCode::InvalidInput, "detection box needs vertices");
  Eigen::AlignedBox3d box;
  const Eigen::Matrix3d rt = pose.rotation.transpose();
  for (const auto& v : mesh.vertices) box.extend((rt * v).eval());
  OrientedBox3D out;
  out.rotation = pose.rotation;
  out.half_extents = 0.5 * pose.scale * box.sizes();
  out.center = pose.scale * (pose.rotation * box.center()) + pose.translation;
  return out;
}

std::vector<MatchedDetection> match_detections(std::span<const DetectionRecord> preds,
                                               std::span<const DetectionRecord> gts,
                                               const SymmetryTable& symmetry, double min_iou,
                                               int iou_resolution) {
  std::vector<MatchedDetection> out(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) out[i].pred_index = int(i);

  // Greedy assignment per image/category, highest score first. Score ties
  // break on the original index so results are order-stable.
  std::vector<int> order(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) order[i] = int(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (preds[a].score != preds[b].score) return preds[a].score > preds[b].score;
    return a < b;
  });

  std::vector<bool> gt_taken(gts.size(), false);
  for (int pi : order) {
    const auto& p = preds[pi];
    int best_gt = -1;
    double best_iou = min_iou;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (gt_taken[gi]) continue;
      const auto& g = gts[gi];
      if (g.image_id != p.image_id || g.category != p.category) continue;
      const double v = iou3d(p.box3d, g.box3d, iou_resolution);
      if (v >= best_iou) {
        best_iou = v;
        best_gt = int(gi);
      }
    }
    if (best_gt >= 0) {
      gt_taken[best_gt] = true;
      out[pi].gt_index = best_gt;
      out[pi].iou = best_iou;
      out[pi].errors = pose_errors(p.pose, gts[best_gt].pose, p.category, symmetry);
    }
  }
  return out;
}

namespace {

double average_precision(std::vector<std::pair<double, bool>>& scored, int num_gt) {
  if (num_gt == 0) return 0.0;
  if (scored.empty()) return 0.0;
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<double> precision, recall;
  int tp = 0, fp = 0;
  for (const auto& [score, is_tp] : scored) {
    (void)score;
    is_tp ? ++tp : ++fp;
    precision.push_back(double(tp) / double(tp + fp));
    recall.push_back(double(tp) / double(num_gt));
  }
  // All-point interpolation: running max of precision from the right.
  for (int i = int(precision.size()) - 2; i >= 0; --i) {
    precision[i] = std::max(precision[i], precision[i + 1]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < recall.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

}  // namespace

double detection_ap_from_match(std::span<const MatchedDetection> matches,
                               std::span<const DetectionRecord> preds,
                               std::span<const DetectionRecord> gts,
                               const ApCriterion& criterion) {
  if (gts.empty()) fail(ErrorCode::EmptyGroundTruth, "no ground-truth instances");

  std::map<std::string, int> gt_count;
  for (const auto& g : gts) ++gt_count[g.category];

  std::map<std::string, std::vector<std::pair<double, bool>>> per_category;
  for (const auto& m : matches) {
    const auto& p = preds[m.pred_index];
    const bool tp = m.gt_index >= 0 && criterion.passes(m.iou, m.errors);
    per_category[p.category].emplace_back(p.score, tp);
  }

  double sum = 0.0;
  int n = 0;
  for (const auto& [category, count] : gt_count) {
    auto it = per_category.find(category);
    std::vector<std::pair<double, bool>> empty;
    sum += 100.0 * average_precision(it != per_category.end() ? it->second : empty, count);
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

double detection_ap(std::span<const DetectionRecord> preds,
                    std::span<const DetectionRecord> gts, const ApCriterion& criterion,
                    const SymmetryTable& symmetry, double min_iou, int iou_resolution) {
  const auto matches = match_detections(preds, gts, symmetry, min_iou, iou_resolution);
  return detection_ap_from_match(matches, preds, gts, criterion);
}

std::vector<SurfaceSample> sample_surface(const TriangleMesh& mesh, int count,
                                          std::uint64_t seed) {
  validate_mesh(mesh);
  if (mesh.faces.empty()) fail(ErrorCode::InvalidInput, "cannot sample an empty mesh");

  std::vector<double> cumulative(mesh.faces.size());
  std::vector<Eigen::Vector3d> normals(mesh.faces.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const auto& f = mesh.faces[i];
    const Eigen::Vector3d e1 = mesh.vertices[f[1]] - mesh.vertices[f[0]];
    const Eigen::Vector3d e2 = mesh.vertices[f[2]] - mesh.vertices[f[0]];
    const Eigen::Vector3d cross = e1.cross(e2);
    const double area = 0.5 * cross.norm();
    total += area;
    cumulative[i] = total;
    normals[i] = area > 0.0 ? (cross / cross.norm()).eval() : Eigen::Vector3d::UnitZ();
  }
  if (!(total > 0.0)) fail(ErrorCode::InvalidInput, "mesh has zero surface area");

  Rng rng(seed);
  std::vector<SurfaceSample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double u = rng.next_double() * total;
    const std::size_t fi =
        std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin();
    const auto& f = mesh.faces[std::min(fi, mesh.faces.size() - 1)];
    double b1 = rng.next_double();
    double b2 = rng.next_double();
    if (b1 + b2 > 1.0) {
      b1 = 1.0 - b1;
      b2 = 1.0 - b2;
    }
    SurfaceSample s;
    s.position = mesh.vertices[f[0]] + b1 * (mesh.vertices[f[1]] - mesh.vertices[f[0]]) +
                 b2 * (mesh.vertices[f[2]] - mesh.vertices[f[0]]);
    s.normal = normals[std::min(fi, mesh.faces.size() - 1)];
    out.push_back(s);
  }
  return out;
}

double chamfer_distance(std::span<const Eigen::Vector3d> a,
                        std::span<const Eigen::Vector3d> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::InvalidInput, "chamfer needs non-empty sets");
  const KdTree3 tree_a(a);
  const KdTree3 tree_b(b);
  double sum_ab = 0.0;
  for (const auto& p : a) sum_ab += tree_b.nearest(p).second;
  double sum_ba = 0.0;
  for (const auto& p : b) sum_ba += tree_a.nearest(p).second;
  return sum_ab / double(a.size()) + sum_ba / double(b.size());
}

double normal_consistency(std::span<const SurfaceSample> a,
                          std::span<const SurfaceSample> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::InvalidInput, "normal consistency needs samples");
  std::vector<Eigen::Vector3d> pa(a.size()), pb(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) pa[i] = a[i].position;
  for (std::size_t i = 0; i < b.size(); ++i) pb[i] = b[i].position;
  const KdTree3 tree_a(pa);
  const KdTree3 tree_b(pb);

  double sum_ab = 0.0;
  for (const auto& s : a) sum_ab += std::abs(s.normal.dot(b[tree_b.nearest(s.position).first].normal));
  double sum_ba = 0.0;
  for (const auto& s : b) sum_ba += std::abs(s.normal.dot(a[tree_a.nearest(s.position).first].normal));
  return 0.5 * (sum_ab / double(a.size()) + sum_ba / double(b.size()));
}

DepthMetrics depth_metrics(const ImageGrid& pred, const ImageGrid& gt) {
  validate_grid(pred);
  validate_grid(gt);
  if (pred.width != gt.width || pred.height != gt.height || pred.channels != 1 ||
      gt.channels != 1) {
    fail(ErrorCode::InvalidInput, "depth metric grids must be 1-channel and equal size");
  }

  double sq_sum = 0.0, rel_sum = 0.0;
  long within[3] = {0, 0, 0};
  long n = 0;
  for (int y = 0; y < gt.height; ++y) {
    for (int x = 0; x < gt.width; ++x) {
      if (!pred.is_valid(x, y) || !gt.is_valid(x, y)) continue;
      const double d = pred.at(x, y);
      const double g = gt.at(x, y);
      sq_sum += (d - g) * (d - g);
      rel_sum += std::abs(d - g) / g;
      const double ratio = std::max(d / g, g / d);
      for (int t = 0; t < 3; ++t) within[t] += ratio < kDeltaThresholds[t];
      ++n;
    }
  }
  if (n == 0) fail(ErrorCode::NoValidPixels, "no pixel valid in both depth maps");

  DepthMetrics out;
  out.rmse = std::sqrt(sq_sum / double(n));
  out.rel = rel_sum / double(n);
  out.pixels = n;
  for (int t = 0; t < 3; ++t) {
    out.delta[kDeltaThresholds[t]] = 100.0 * double(within[t]) / double(n);
  }
  return out;
}

}  // namespace mp
