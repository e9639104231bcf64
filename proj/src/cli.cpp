#include "mp/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "mp/float_map.hpp"
#include "mp/metrics.hpp"
#include "mp/noce.hpp"
#include "mp/obj_io.hpp"
#include "mp/parallel.hpp"
#include "mp/pose.hpp"
#include "mp/records.hpp"
#include "mp/rng.hpp"
#include "mp/synth.hpp"

namespace mp {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return Rng::substream(seed, index).next_u64();
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("MP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

std::string scene_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%04d", index);
  return buf;
}

std::string object_file(int index, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "obj_%03d_%s", index, suffix);
  return buf;
}

CameraIntrinsics parse_intrinsics(const std::string& text) {
  CameraIntrinsics k;
  double w = 0, h = 0;
  if (std::sscanf(text.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &k.fx, &k.fy, &k.cx, &k.cy, &w,
                  &h) != 6) {
    fail(ErrorCode::InvalidInput, "intrinsics must be fx,fy,cx,cy,width,height");
  }
  k.width = int(w);
  k.height = int(h);
  validate_intrinsics(k);
  return k;
}

PerturbationSpec parse_perturbation(const std::string& text) {
  PerturbationSpec spec;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail(ErrorCode::InvalidInput, "perturb expects key=value pairs");
    const std::string key = item.substr(0, eq);
    const double value = std::atof(item.substr(eq + 1).c_str());
    if (key == "z") spec.z_rel_noise = value;
    else if (key == "r") spec.r_rel_noise = value;
    else if (key == "nocs") spec.nocs_noise_sigma = value;
    else if (key == "outliers") spec.nocs_outlier_frac = value;
    else if (key == "erode") spec.mask_erosion_px = value;
    else fail(ErrorCode::InvalidInput, "unknown perturbation key: " + key);
  }
  return spec;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  std::uint64_t seed = 0;
  int scenes = 1;
  std::string out;
  int objects_min = 1, objects_max = 3;
  int subdivisions = 32;
  double fx = 800.0, fy = 800.0, cx = 320.0, cy = 240.0;
  int width = 640, height = 480;
  std::string perturb_text;
  int threads = 0;
};

void write_scene(const SynthOptions& opt, const PerturbationSpec& pspec, int scene_index) {
  CameraIntrinsics k{opt.fx, opt.fy, opt.cx, opt.cy, opt.width, opt.height};
  const std::uint64_t scene_seed = derive_seed(opt.seed, std::uint64_t(scene_index));
  const SceneSpec scene = sample_scene(scene_seed, k, opt.objects_min, opt.objects_max,
                                       opt.subdivisions);
  const auto bundles = render_ground_truth(scene);

  const fs::path dir = fs::path(opt.out) / scene_name(scene_index);
  fs::create_directories(dir);

  ImageRecord record;
  record.image_id = scene_name(scene_index);
  record.intrinsics = k;

  int emitted = 0;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    if (!bundles[i]) continue;  // fully occluded
    GroundTruthObject gt = perturb(*bundles[i], pspec, derive_seed(scene_seed, i + 1));

    ObjectRecord obj;
    obj.category = gt.category;
    obj.bbox = gt.detector_bbox;
    // Scalars pass through the patch normalization round trip, mirroring how
    // a predictor trained on normalized targets restores them at inference.
    const double z_noce = noce_normalize(gt.z_center, obj.bbox, kDefaultPatchSize, k);
    obj.z_center = noce_denormalize(z_noce, obj.bbox, kDefaultPatchSize, k);
    obj.radius = radius_denormalize(radius_normalize(gt.radius, obj.z_center), obj.z_center);
    obj.mesh_file = object_file(emitted, "mesh.obj");
    obj.nocs_file = object_file(emitted, "nocs.mpf");
    obj.depth_file = object_file(emitted, "depth.mpf");
    obj.mask_file = object_file(emitted, "mask.mpf");
    obj.gt_pose = gt.gt_pose;
    obj.score = 1.0;

    save_obj(dir / obj.mesh_file, gt.input_mesh);
    save_float_map(dir / obj.nocs_file, gt.nocs);
    save_float_map(dir / obj.depth_file, gt.depth);
    save_float_map(dir / obj.mask_file, grid_from_mask(gt.mask));
    record.objects.push_back(obj);
    ++emitted;
  }
  save_record(dir / "record.json", record);
}

int cmd_synth(const SynthOptions& opt) {
  const PerturbationSpec pspec = parse_perturbation(opt.perturb_text);
  fs::create_directories(opt.out);
  const int threads = resolve_threads(opt.threads);
  parallel_for(opt.scenes, threads, [&](int i) { write_scene(opt, pspec, i); });
  std::cout << "wrote " << opt.scenes << " scenes to " << opt.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// lift / render

const ObjectRecord& record_object(const ImageRecord& record, int index) {
  if (index < 0 || index >= int(record.objects.size())) {
    fail(ErrorCode::IndexOutOfRange, "object index out of range");
  }
  return record.objects[std::size_t(index)];
}

LiftInputs lift_inputs_from(const ImageRecord& record, const ObjectRecord& obj,
                            const fs::path& record_dir) {
  LiftInputs in;
  in.mesh = load_obj(record_dir / obj.mesh_file, MeshFrame::Normalized);
  in.bbox = obj.bbox;
  in.z_center = obj.z_center;
  in.radius = obj.radius;
  in.intrinsics = record.intrinsics;
  return in;
}

int cmd_lift(const std::string& record_path, int index, const std::string& out) {
  const ImageRecord record = load_record(record_path);
  const ObjectRecord& obj = record_object(record, index);
  const LiftInputs in = lift_inputs_from(record, obj, fs::path(record_path).parent_path());
  save_obj(out, lift_to_metric(in));
  return 0;
}

int cmd_render(const std::string& mesh_path, const std::string& intrinsics_text,
               const std::string& depth_out, const std::string& nocs_out, int threads_flag) {
  const CameraIntrinsics k = parse_intrinsics(intrinsics_text);
  const TriangleMesh mesh = load_obj(mesh_path, MeshFrame::CameraMetric);
  const int threads = resolve_threads(threads_flag);

  if (nocs_out.empty()) {
    save_float_map(depth_out, render_depth(mesh, k, threads));
    return 0;
  }
  // Attribute channels are the mesh's own bounding-sphere-normalized
  // coordinates shifted into [0, 1]; for an already normalized mesh this is
  // vertex + 0.5.
  const Eigen::Vector3d center = bounding_sphere_center(mesh.vertices);
  double radius = 0.0;
  for (const auto& v : mesh.vertices) radius = std::max(radius, (v - center).norm());
  if (!(radius > 0.0)) fail(ErrorCode::InvalidInput, "degenerate mesh");
  std::vector<Eigen::Vector3d> attrs;
  attrs.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices) {
    attrs.push_back((v - center) / (2.0 * radius) + Eigen::Vector3d(0.5, 0.5, 0.5));
  }
  const auto render = render_depth_attributes(mesh, attrs, k, threads);
  save_float_map(depth_out, render.depth);
  save_float_map(nocs_out, render.attributes);
  return 0;
}

// ---------------------------------------------------------------------------
// solve

struct SolveOptions {
  std::string record_path;
  int index = 0;
  std::string out;
  std::string od_text;
  std::string pred_dir;
  RansacConfig ransac;
  int threads = 0;
};

int cmd_solve(const SolveOptions& opt) {
  const ImageRecord record = load_record(opt.record_path);
  const ObjectRecord& obj = record_object(record, opt.index);
  const fs::path record_dir = fs::path(opt.record_path).parent_path();

  const LiftInputs in = lift_inputs_from(record, obj, record_dir);
  const ImageGrid nocs = load_float_map(record_dir / obj.nocs_file);
  const BoolImage mask = mask_from_grid(load_float_map(record_dir / obj.mask_file));

  std::optional<SparseDepthObservation> obs;
  if (!opt.od_text.empty()) {
    SparseDepthObservation o;
    double u = 0, v = 0, d = 0;
    if (std::sscanf(opt.od_text.c_str(), "%lf,%lf,%lf", &u, &v, &d) != 3) {
      fail(ErrorCode::InvalidInput, "--od expects u,v,depth");
    }
    o.pixel = {int(u), int(v)};
    o.depth = d;
    obs = o;
  }

  const int threads = resolve_threads(opt.threads);
  const EstimateResult result = estimate_object(in, nocs, mask, opt.ransac,
                                                obs ? &*obs : nullptr, threads);

  json j;
  j["image_id"] = record.image_id;
  j["index"] = opt.index;
  j["category"] = obj.category;
  j["pose"] = {{"scale", result.pose.transform.scale},
               {"rotation", std::vector<double>{result.pose.transform.rotation(0, 0),
                                                result.pose.transform.rotation(0, 1),
                                                result.pose.transform.rotation(0, 2),
                                                result.pose.transform.rotation(1, 0),
                                                result.pose.transform.rotation(1, 1),
                                                result.pose.transform.rotation(1, 2),
                                                result.pose.transform.rotation(2, 0),
                                                result.pose.transform.rotation(2, 1),
                                                result.pose.transform.rotation(2, 2)}},
               {"translation", std::vector<double>{result.pose.transform.translation.x(),
                                                   result.pose.transform.translation.y(),
                                                   result.pose.transform.translation.z()}}};
  j["size"] = {result.pose.size.x(), result.pose.size.y(), result.pose.size.z()};
  j["inlier_count"] = result.pose.inlier_count;
  j["inlier_ratio"] = result.pose.inlier_ratio;
  j["z_center"] = result.z_center;
  j["radius"] = result.radius;
  std::ofstream out(opt.out);
  if (!out) fail(ErrorCode::IoError, "cannot open for writing: " + opt.out);
  out << j.dump(2) << '\n';

  if (!opt.pred_dir.empty()) {
    const fs::path scene_dir = fs::path(opt.pred_dir) / record.image_id;
    fs::create_directories(scene_dir);

    ImageRecord pred;
    const fs::path pred_record = scene_dir / "record.json";
    if (fs::exists(pred_record)) {
      pred = load_record(pred_record, /*check_files=*/false);
    } else {
      pred = record;  // start from the source record, predictions fill in
    }
    if (opt.index >= int(pred.objects.size())) {
      fail(ErrorCode::IndexOutOfRange, "prediction record shorter than object index");
    }
    ObjectRecord& pobj = pred.objects[std::size_t(opt.index)];
    pobj.pose = result.pose.transform;
    pobj.score = obj.score.value_or(1.0);
    pobj.z_center = result.z_center;
    pobj.radius = result.radius;
    pobj.metric_mesh_file = object_file(opt.index, "metric_mesh.obj");
    pobj.rendered_depth_file = object_file(opt.index, "depth_r.mpf");
    save_obj(scene_dir / *pobj.metric_mesh_file, result.metric_mesh);
    save_float_map(scene_dir / *pobj.rendered_depth_file, result.rendered_depth);
    save_record(pred_record, pred);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalObjectData {
  DetectionRecord det;
  fs::path mesh_path;
  SimilarityTransform metric_from_mesh;       // scale/translate-only fallback
  std::optional<fs::path> metric_mesh_path;   // solver-written mesh if present
  fs::path depth_path;
};

struct EvalOptions {
  std::string pred_dir, gt_dir, out, curves;
  int threads = 0;
  int iou_resolution = 64;
  int samples = kSurfaceSampleCount;
  std::uint64_t seed = 0;
  bool skip_shape = false;
};

// Resolve a record file reference against the prediction directory first,
// then the ground-truth directory (prediction records reuse source names).
fs::path resolve_ref(const fs::path& pred_dir, const fs::path& gt_dir, const std::string& name) {
  if (fs::exists(pred_dir / name)) return pred_dir / name;
  const fs::path fallback = gt_dir / name;
  if (!fs::exists(fallback)) fail(ErrorCode::IoError, "missing file: " + fallback.string());
  return fallback;
}

TriangleMesh load_metric_mesh(const EvalObjectData& data) {
  if (data.metric_mesh_path) return load_obj(*data.metric_mesh_path, MeshFrame::CameraMetric);
  const TriangleMesh mesh = load_obj(data.mesh_path, MeshFrame::Normalized);
  return transform_mesh(mesh, data.metric_from_mesh, MeshFrame::CameraMetric);
}

int cmd_eval(const EvalOptions& opt) {
  const auto gt_records = find_records(opt.gt_dir);
  if (gt_records.empty()) fail(ErrorCode::EmptyGroundTruth, "no records under " + opt.gt_dir);
  const int threads = resolve_threads(opt.threads);

  struct SceneData {
    std::vector<EvalObjectData> preds, gts;
  };
  std::vector<SceneData> scenes(gt_records.size());

  parallel_for(int(gt_records.size()), threads, [&](int si) {
    const fs::path gt_record_path = gt_records[std::size_t(si)];
    const fs::path gt_scene_dir = gt_record_path.parent_path();
    const fs::path pred_record_path =
        fs::path(opt.pred_dir) / gt_scene_dir.filename() / "record.json";
    if (!fs::exists(pred_record_path)) {
      fail(ErrorCode::IoError, "missing prediction record: " + pred_record_path.string());
    }
    const ImageRecord gt = load_record(gt_record_path);
    const ImageRecord pred = load_record(pred_record_path, /*check_files=*/false);
    const fs::path pred_scene_dir = pred_record_path.parent_path();

    SceneData& scene = scenes[std::size_t(si)];
    for (const auto& obj : gt.objects) {
      if (!obj.gt_pose) fail(ErrorCode::InvalidInput, "ground-truth record without gt_pose");
      EvalObjectData d;
      d.mesh_path = gt_scene_dir / obj.mesh_file;
      const TriangleMesh mesh = load_obj(d.mesh_path, MeshFrame::Normalized);
      d.det.image_id = gt.image_id;
      d.det.category = obj.category;
      d.det.score = 1.0;
      d.det.pose = *obj.gt_pose;
      d.det.box3d = detection_box(mesh, d.det.pose);
      d.metric_from_mesh = {obj.gt_pose->scale, Eigen::Matrix3d::Identity(),
                            obj.gt_pose->translation};
      d.depth_path = gt_scene_dir / obj.depth_file;
      scene.gts.push_back(std::move(d));
    }
    for (const auto& obj : pred.objects) {
      if (!obj.pose && !obj.gt_pose) {
        fail(ErrorCode::InvalidInput, "prediction record object without any pose");
      }
      const SimilarityTransform pose = obj.pose ? *obj.pose : *obj.gt_pose;
      EvalObjectData d;
      d.mesh_path = resolve_ref(pred_scene_dir, gt_scene_dir, obj.mesh_file);
      const TriangleMesh mesh = load_obj(d.mesh_path, MeshFrame::Normalized);
      d.det.image_id = pred.image_id;
      d.det.category = obj.category;
      d.det.score = obj.score.value_or(1.0);
      d.det.pose = pose;
      d.det.box3d = detection_box(mesh, pose);
      d.metric_from_mesh = {pose.scale, Eigen::Matrix3d::Identity(), pose.translation};
      if (obj.metric_mesh_file) d.metric_mesh_path = pred_scene_dir / *obj.metric_mesh_file;
      d.depth_path = obj.rendered_depth_file
                         ? pred_scene_dir / *obj.rendered_depth_file
                         : resolve_ref(pred_scene_dir, gt_scene_dir, obj.depth_file);
      scene.preds.push_back(std::move(d));
    }
  });

  std::vector<EvalObjectData> preds, gts;
  for (auto& scene : scenes) {
    for (auto& d : scene.preds) preds.push_back(std::move(d));
    for (auto& d : scene.gts) gts.push_back(std::move(d));
  }

  std::vector<DetectionRecord> pred_dets, gt_dets;
  pred_dets.reserve(preds.size());
  gt_dets.reserve(gts.size());
  for (const auto& d : preds) pred_dets.push_back(d.det);
  for (const auto& d : gts) gt_dets.push_back(d.det);

  const SymmetryTable symmetry;
  const auto matches =
      match_detections(pred_dets, gt_dets, symmetry, 0.1, opt.iou_resolution);

  MetricReport report;
  report.num_images = int(gt_records.size());
  report.num_ground_truth = int(gt_dets.size());
  report.num_predictions = int(pred_dets.size());
  for (double threshold : {0.25, 0.50, 0.75}) {
    report.iou_ap[threshold] = detection_ap_from_match(matches, pred_dets, gt_dets,
                                                       ApCriterion::iou(threshold));
  }
  const std::vector<ApCriterion> pose_criteria = {
      ApCriterion::pose(5.0, 5.0),   ApCriterion::pose(10.0, 10.0),
      ApCriterion::pose(5.0, {}),    ApCriterion::pose(10.0, {}),
      ApCriterion::pose({}, 5.0),    ApCriterion::pose({}, 10.0)};
  for (const auto& criterion : pose_criteria) {
    report.pose_ap.emplace_back(
        criterion, detection_ap_from_match(matches, pred_dets, gt_dets, criterion));
  }

  // Shape and depth agreement over matched pairs.
  std::vector<const MatchedDetection*> matched;
  for (const auto& m : matches) {
    if (m.gt_index >= 0) matched.push_back(&m);
  }
  std::vector<double> chamfers(matched.size(), 0.0), normals(matched.size(), 0.0);
  std::vector<DepthMetrics> depth_parts(matched.size());
  parallel_for(int(matched.size()), threads, [&](int mi) {
    const MatchedDetection& m = *matched[std::size_t(mi)];
    const EvalObjectData& pd = preds[std::size_t(m.pred_index)];
    const EvalObjectData& gd = gts[std::size_t(m.gt_index)];
    if (!opt.skip_shape) {
      const TriangleMesh pred_mesh = load_metric_mesh(pd);
      const TriangleMesh gt_mesh = load_metric_mesh(gd);
      const auto ps = sample_surface(pred_mesh, opt.samples, derive_seed(opt.seed, 2 * mi));
      const auto gs = sample_surface(gt_mesh, opt.samples, derive_seed(opt.seed, 2 * mi + 1));
      std::vector<Eigen::Vector3d> pp(ps.size()), gp(gs.size());
      for (std::size_t i = 0; i < ps.size(); ++i) pp[i] = ps[i].position;
      for (std::size_t i = 0; i < gs.size(); ++i) gp[i] = gs[i].position;
      chamfers[std::size_t(mi)] = chamfer_distance(pp, gp);
      normals[std::size_t(mi)] = normal_consistency(ps, gs);
    }
    depth_parts[std::size_t(mi)] =
        depth_metrics(load_float_map(pd.depth_path), load_float_map(gd.depth_path));
  });

  if (!matched.empty()) {
    double chamfer_sum = 0.0, normal_sum = 0.0;
    double sq = 0.0, rel = 0.0;
    std::map<double, double> delta_sum;
    long pixels = 0;
    for (std::size_t i = 0; i < matched.size(); ++i) {
      chamfer_sum += chamfers[i];
      normal_sum += normals[i];
      const auto& dm = depth_parts[i];
      sq += dm.rmse * dm.rmse * double(dm.pixels);
      rel += dm.rel * double(dm.pixels);
      for (const auto& [tau, pct] : dm.delta) delta_sum[tau] += pct * double(dm.pixels);
      pixels += dm.pixels;
    }
    report.chamfer_mean_x1e3 = 1e3 * chamfer_sum / double(matched.size());
    report.normal_consistency = normal_sum / double(matched.size());
    report.depth.rmse = std::sqrt(sq / double(pixels));
    report.depth.rel = rel / double(pixels);
    report.depth.pixels = pixels;
    for (const auto& [tau, sum] : delta_sum) report.depth.delta[tau] = sum / double(pixels);
  }

  save_report(opt.out, report);

  if (!opt.curves.empty()) {
    std::ofstream curves(opt.curves);
    if (!curves) fail(ErrorCode::IoError, "cannot open for writing: " + opt.curves);
    curves << "kind,threshold,map\n";
    char line[128];
    for (int i = 1; i <= 19; ++i) {
      const double t = 0.05 * i;
      const double ap = detection_ap_from_match(matches, pred_dets, gt_dets, ApCriterion::iou(t));
      std::snprintf(line, sizeof(line), "iou,%.2f,%.6f\n", t, ap);
      curves << line;
    }
    for (int deg = 1; deg <= 30; ++deg) {
      const double ap = detection_ap_from_match(matches, pred_dets, gt_dets,
                                                ApCriterion::pose(double(deg), {}));
      std::snprintf(line, sizeof(line), "rotation_deg,%d,%.6f\n", deg, ap);
      curves << line;
    }
    for (int half_cm = 1; half_cm <= 30; ++half_cm) {
      const double cm = 0.5 * half_cm;
      const double ap = detection_ap_from_match(matches, pred_dets, gt_dets,
                                                ApCriterion::pose({}, cm));
      std::snprintf(line, sizeof(line), "translation_cm,%.1f,%.6f\n", cm, ap);
      curves << line;
    }
  }

  std::cout << "evaluated " << pred_dets.size() << " predictions against " << gt_dets.size()
            << " ground-truth objects\n";
  return 0;
}

// ---------------------------------------------------------------------------
// ablate

struct AblateOptions {
  std::string mode;
  std::uint64_t seed = 0;
  int scenes = 20;
  std::string out;
  double z_noise = 0.1;
  double depth_noise = 0.02;
  int threads = 0;
  int subdivisions = 32;
};

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / double(values.size());
}

int cmd_ablate_noce(const AblateOptions& opt) {
  CameraIntrinsics k{800.0, 800.0, 320.0, 240.0, 640, 480};

  struct Item {
    double z, z_noce, tau;
  };
  std::vector<std::vector<Item>> per_scene(opt.scenes);
  parallel_for(opt.scenes, resolve_threads(opt.threads), [&](int si) {
    const SceneSpec scene =
        sample_scene(derive_seed(opt.seed, si), k, 1, 3, opt.subdivisions);
    const auto bundles = render_ground_truth(scene);
    for (const auto& b : bundles) {
      if (!b) continue;
      Item item;
      item.z = b->z_center;
      item.tau = resize_ratio(b->detector_bbox, kDefaultPatchSize);
      item.z_noce = noce_normalize(b->z_center, b->detector_bbox, kDefaultPatchSize, k);
      per_scene[si].push_back(item);
    }
  });

  std::vector<Item> items;
  for (const auto& s : per_scene) items.insert(items.end(), s.begin(), s.end());
  if (items.empty()) fail(ErrorCode::InvalidInput, "no objects generated");

  // The uncompensated baseline cannot know each box's resize ratio; the best
  // it can do is a single dataset-wide constant.
  double tau_mean = 0.0;
  for (const auto& it : items) tau_mean += it.tau;
  tau_mean /= double(items.size());

  std::vector<double> compensated, baseline;
  for (const auto& it : items) {
    const double z_back = it.z_noce * k.focal() / it.tau;
    compensated.push_back(std::abs(z_back - it.z));
    baseline.push_back(std::abs(it.z_noce * k.focal() / tau_mean - it.z));
  }

  json j;
  j["mode"] = "noce";
  j["objects"] = items.size();
  j["median_compensated_error_m"] = median(compensated);
  j["median_baseline_error_m"] = median(baseline);
  j["mean_compensated_error_m"] = mean(compensated);
  j["mean_baseline_error_m"] = mean(baseline);
  std::ofstream out(opt.out);
  if (!out) fail(ErrorCode::IoError, "cannot open for writing: " + opt.out);
  out << j.dump(2) << '\n';
  std::cout << "noce ablation: median error " << median(compensated) << " m compensated vs "
            << median(baseline) << " m uncompensated over " << items.size() << " objects\n";
  return 0;
}

int cmd_ablate_depth(const AblateOptions& opt) {
  CameraIntrinsics k{800.0, 800.0, 320.0, 240.0, 640, 480};
  const bool regress = opt.mode == "regress-depth";
  const SymmetryTable symmetry;

  struct Errors {
    std::vector<double> rot, trans;
  };
  std::vector<Errors> per_scene(opt.scenes);
  parallel_for(opt.scenes, resolve_threads(opt.threads), [&](int si) {
    const std::uint64_t scene_seed = derive_seed(opt.seed, si);
    const SceneSpec scene = sample_scene(scene_seed, k, 1, 2, opt.subdivisions);
    const auto bundles = render_ground_truth(scene);
    for (std::size_t oi = 0; oi < bundles.size(); ++oi) {
      if (!bundles[oi]) continue;
      const GroundTruthObject& gt = *bundles[oi];
      Rng rng = Rng::substream(scene_seed, 0xD00 + oi);

      SimilarityTransform estimate;
      RansacConfig config;
      config.seed = derive_seed(scene_seed, oi + 101);
      if (regress) {
        // Per-pixel regression baseline: the depth source is the observed
        // depth with independent pixel noise, no mesh in the loop.
        ImageGrid noisy = gt.depth;
        for (int y = 0; y < noisy.height; ++y) {
          for (int x = 0; x < noisy.width; ++x) {
            if (!noisy.is_valid(x, y)) continue;
            noisy.at(x, y) =
                float(std::max(1e-3, noisy.at(x, y) + opt.depth_noise * rng.normal()));
          }
        }
        const auto corr = build_correspondences(gt.nocs, noisy, gt.mask, k);
        estimate = solve_pose(corr, config).transform;
      } else {
        LiftInputs in;
        in.mesh = gt.input_mesh;
        in.bbox = gt.detector_bbox;
        in.z_center = gt.z_center * (1.0 + rng.uniform(-opt.z_noise, opt.z_noise));
        in.radius = gt.radius;
        in.intrinsics = k;
        estimate = estimate_object(in, gt.nocs, gt.mask, config).pose.transform;
      }
      const PoseErrors err = pose_errors(estimate, gt.gt_pose, gt.category, symmetry);
      per_scene[si].rot.push_back(err.rotation_deg);
      per_scene[si].trans.push_back(err.translation_cm);
    }
  });

  std::vector<double> rot, trans;
  for (const auto& s : per_scene) {
    rot.insert(rot.end(), s.rot.begin(), s.rot.end());
    trans.insert(trans.end(), s.trans.begin(), s.trans.end());
  }
  if (rot.empty()) fail(ErrorCode::InvalidInput, "no objects generated");

  auto fraction_under = [&](const std::vector<double>& v, double bound) {
    int n = 0;
    for (double x : v) n += x < bound;
    return 100.0 * n / double(v.size());
  };

  json j;
  j["mode"] = opt.mode;
  j["objects"] = rot.size();
  j["z_noise"] = opt.z_noise;
  if (regress) j["depth_noise_m"] = opt.depth_noise;
  j["median_rotation_deg"] = median(rot);
  j["median_translation_cm"] = median(trans);
  j["mean_rotation_deg"] = mean(rot);
  j["mean_translation_cm"] = mean(trans);
  j["pct_under_10deg"] = fraction_under(rot, 10.0);
  j["pct_under_10cm"] = fraction_under(trans, 10.0);
  std::ofstream out(opt.out);
  if (!out) fail(ErrorCode::IoError, "cannot open for writing: " + opt.out);
  out << j.dump(2) << '\n';
  std::cout << opt.mode << ": median rotation " << median(rot) << " deg, median translation "
            << median(trans) << " cm over " << rot.size() << " objects\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"category-level metric-scale shape and pose toolkit"};
  app.require_subcommand(1);

  SynthOptions synth_opt;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->add_option("--seed", synth_opt.seed);
  synth_cmd->add_option("--scenes", synth_opt.scenes)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--out", synth_opt.out)->required();
  synth_cmd->add_option("--objects-min", synth_opt.objects_min);
  synth_cmd->add_option("--objects-max", synth_opt.objects_max);
  synth_cmd->add_option("--subdiv", synth_opt.subdivisions);
  synth_cmd->add_option("--width", synth_opt.width);
  synth_cmd->add_option("--height", synth_opt.height);
  synth_cmd->add_option("--fx", synth_opt.fx);
  synth_cmd->add_option("--fy", synth_opt.fy);
  synth_cmd->add_option("--cx", synth_opt.cx);
  synth_cmd->add_option("--cy", synth_opt.cy);
  synth_cmd->add_option("--perturb", synth_opt.perturb_text,
                        "z=..,r=..,nocs=..,outliers=..,erode=..");
  synth_cmd->add_option("--threads", synth_opt.threads);

  std::string lift_record, lift_out;
  int lift_index = 0;
  auto* lift_cmd = app.add_subcommand("lift", "lift a normalized mesh to metric scale");
  lift_cmd->add_option("--record", lift_record)->required();
  lift_cmd->add_option("--index", lift_index)->required();
  lift_cmd->add_option("--out", lift_out)->required();

  std::string render_mesh, render_intrinsics, render_depth_out, render_nocs_out;
  int render_threads = 0;
  auto* render_cmd = app.add_subcommand("render", "render a depth map from a mesh");
  render_cmd->add_option("--mesh", render_mesh)->required();
  render_cmd->add_option("--intrinsics", render_intrinsics, "fx,fy,cx,cy,width,height")
      ->required();
  render_cmd->add_option("--out", render_depth_out)->required();
  render_cmd->add_option("--nocs", render_nocs_out);
  render_cmd->add_option("--threads", render_threads);

  SolveOptions solve_opt;
  auto* solve_cmd = app.add_subcommand("solve", "estimate pose and size for one object");
  solve_cmd->add_option("--record", solve_opt.record_path)->required();
  solve_cmd->add_option("--index", solve_opt.index)->required();
  solve_cmd->add_option("--out", solve_opt.out)->required();
  solve_cmd->add_option("--od", solve_opt.od_text, "sparse depth observation u,v,depth");
  solve_cmd->add_option("--pred", solve_opt.pred_dir, "prediction dataset dir to fill");
  solve_cmd->add_option("--ransac-iters", solve_opt.ransac.iterations);
  solve_cmd->add_option("--inlier-thresh", solve_opt.ransac.inlier_threshold);
  solve_cmd->add_option("--min-sample", solve_opt.ransac.min_sample);
  solve_cmd->add_option("--seed", solve_opt.ransac.seed);
  solve_cmd->add_option("--threads", solve_opt.threads);

  EvalOptions eval_opt;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate predictions against ground truth");
  eval_cmd->add_option("--pred", eval_opt.pred_dir)->required();
  eval_cmd->add_option("--gt", eval_opt.gt_dir)->required();
  eval_cmd->add_option("--out", eval_opt.out)->required();
  eval_cmd->add_option("--curves", eval_opt.curves);
  eval_cmd->add_option("--iou-res", eval_opt.iou_resolution);
  eval_cmd->add_option("--samples", eval_opt.samples);
  eval_cmd->add_option("--seed", eval_opt.seed);
  eval_cmd->add_flag("--skip-shape", eval_opt.skip_shape);
  eval_cmd->add_option("--threads", eval_opt.threads);

  AblateOptions ablate_opt;
  auto* ablate_cmd = app.add_subcommand("ablate", "run a controlled comparison");
  ablate_cmd->add_option("--mode", ablate_opt.mode)
      ->required()
      ->check(CLI::IsMember({"noce", "rendered-depth", "regress-depth"}));
  ablate_cmd->add_option("--seed", ablate_opt.seed);
  ablate_cmd->add_option("--scenes", ablate_opt.scenes)->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--out", ablate_opt.out)->required();
  ablate_cmd->add_option("--z-noise", ablate_opt.z_noise);
  ablate_cmd->add_option("--depth-noise", ablate_opt.depth_noise);
  ablate_cmd->add_option("--subdiv", ablate_opt.subdivisions);
  ablate_cmd->add_option("--threads", ablate_opt.threads);

  std::vector<const char*> argv;
  argv.push_back("metricpose");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help() << std::flush;
      return 0;
    }
    std::cerr << "{\"error\": \"UsageError\", \"message\": " << json(e.what()).dump() << "}\n";
    return 2;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth_opt);
    if (lift_cmd->parsed()) return cmd_lift(lift_record, lift_index, lift_out);
    if (render_cmd->parsed()) {
      return cmd_render(render_mesh, render_intrinsics, render_depth_out, render_nocs_out,
                        render_threads);
    }
    if (solve_cmd->parsed()) return cmd_solve(solve_opt);
    if (eval_cmd->parsed()) return cmd_eval(eval_opt);
    if (ablate_cmd->parsed()) {
      return ablate_opt.mode == "noce" ? cmd_ablate_noce(ablate_opt)
                                       : cmd_ablate_depth(ablate_opt);
    }
  } catch (const Error& e) {
    std::cerr << "{\"error\": \"" << error_code_name(e.code())
              << "\", \"message\": " << json(e.what()).dump() << "}\n";
    return e.code() == ErrorCode::NoConsensus ? 4 : 3;
  } catch (const std::exception& e) {
    std::cerr << "{\"error\": \"InternalError\", \"message\": " << json(e.what()).dump()
              << "}\n";
    return 3;
  }
  return 2;
}

}  // namespace mp
