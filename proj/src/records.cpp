#include "mp/records.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace mp {

using json = nlohmann::ordered_json;

namespace {

json pose_to_json(const SimilarityTransform& t) {
  json j;
  j["scale"] = t.scale;
  std::vector<double> rot(9);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot[r * 3 + c] = t.rotation(r, c);
  j["rotation"] = rot;
  j["translation"] = {t.translation.x(), t.translation.y(), t.translation.z()};
  return j;
}

SimilarityTransform pose_from_json(const json& j) {
  SimilarityTransform t;
  t.scale = j.at("scale").get<double>();
  const auto rot = j.at("rotation").get<std::vector<double>>();
  if (rot.size() != 9) fail(ErrorCode::ParseError, "pose rotation must have 9 entries");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) t.rotation(r, c) = rot[r * 3 + c];
  const auto tr = j.at("translation").get<std::vector<double>>();
  if (tr.size() != 3) fail(ErrorCode::ParseError, "pose translation must have 3 entries");
  t.translation = {tr[0], tr[1], tr[2]};
  if (!(t.scale > 0.0)) fail(ErrorCode::ParseError, "pose scale must be positive");
  if (!is_rotation(t.rotation, 1e-6)) {
    fail(ErrorCode::ParseError, "pose rotation is not orthonormal within 1e-6");
  }
  return t;
}

}  // namespace

ImageRecord load_record(const std::filesystem::path& path, bool check_files) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }

  ImageRecord rec;
  try {
    rec.image_id = j.at("image_id").get<std::string>();
    const auto& k = j.at("intrinsics");
    rec.intrinsics.fx = k.at("fx").get<double>();
    rec.intrinsics.fy = k.at("fy").get<double>();
    rec.intrinsics.cx = k.at("cx").get<double>();
    rec.intrinsics.cy = k.at("cy").get<double>();
    rec.intrinsics.width = k.at("width").get<int>();
    rec.intrinsics.height = k.at("height").get<int>();

    for (const auto& o : j.at("objects")) {
      ObjectRecord obj;
      obj.category = o.at("category").get<std::string>();
      const auto bbox = o.at("bbox").get<std::vector<double>>();
      if (bbox.size() != 4) fail(ErrorCode::ParseError, "bbox must have 4 entries");
      obj.bbox = {bbox[0], bbox[1], bbox[2], bbox[3]};
      obj.z_center = o.at("z_center").get<double>();
      obj.radius = o.at("radius").get<double>();
      const auto& files = o.at("files");
      obj.mesh_file = files.at("mesh").get<std::string>();
      obj.nocs_file = files.at("nocs").get<std::string>();
      obj.depth_file = files.at("depth").get<std::string>();
      obj.mask_file = files.at("mask").get<std::string>();
      if (files.contains("metric_mesh")) {
        obj.metric_mesh_file = files.at("metric_mesh").get<std::string>();
      }
      if (files.contains("rendered_depth")) {
        obj.rendered_depth_file = files.at("rendered_depth").get<std::string>();
      }
      if (o.contains("gt_pose")) obj.gt_pose = pose_from_json(o.at("gt_pose"));
      if (o.contains("pose")) obj.pose = pose_from_json(o.at("pose"));
      if (o.contains("score")) obj.score = o.at("score").get<double>();
      rec.objects.push_back(obj);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }

  validate_intrinsics(rec.intrinsics);
  if (check_files) {
    const auto dir = path.parent_path();
    for (const auto& obj : rec.objects) {
      std::vector<std::string> refs = {obj.mesh_file, obj.nocs_file, obj.depth_file,
                                       obj.mask_file};
      if (obj.metric_mesh_file) refs.push_back(*obj.metric_mesh_file);
      if (obj.rendered_depth_file) refs.push_back(*obj.rendered_depth_file);
      for (const auto& f : refs) {
        if (!std::filesystem::exists(dir / f)) {
          fail(ErrorCode::IoError, "missing referenced file: " + (dir / f).string());
        }
      }
    }
  }
  return rec;
}

void save_record(const std::filesystem::path& path, const ImageRecord& record) {
  json j;
  j["image_id"] = record.image_id;
  j["intrinsics"] = {{"fx", record.intrinsics.fx},     {"fy", record.intrinsics.fy},
                     {"cx", record.intrinsics.cx},     {"cy", record.intrinsics.cy},
                     {"width", record.intrinsics.width}, {"height", record.intrinsics.height}};
  j["objects"] = json::array();
  for (const auto& obj : record.objects) {
    json o;
    o["category"] = obj.category;
    o["bbox"] = {obj.bbox.x, obj.bbox.y, obj.bbox.w, obj.bbox.h};
    o["z_center"] = obj.z_center;
    o["radius"] = obj.radius;
    o["files"] = {{"mesh", obj.mesh_file},
                  {"nocs", obj.nocs_file},
                  {"depth", obj.depth_file},
                  {"mask", obj.mask_file}};
    if (obj.metric_mesh_file) o["files"]["metric_mesh"] = *obj.metric_mesh_file;
    if (obj.rendered_depth_file) o["files"]["rendered_depth"] = *obj.rendered_depth_file;
    if (obj.gt_pose) o["gt_pose"] = pose_to_json(*obj.gt_pose);
    if (obj.pose) o["pose"] = pose_to_json(*obj.pose);
    if (obj.score) o["score"] = *obj.score;
    j["objects"].push_back(o);
  }

  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

std::vector<std::filesystem::path> find_records(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) {
    fail(ErrorCode::IoError, "not a directory: " + root.string());
  }
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    const auto record = entry.path() / "record.json";
    if (std::filesystem::exists(record)) out.push_back(record);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void save_report(const std::filesystem::path& path, const MetricReport& report) {
  json j;
  j["num_images"] = report.num_images;
  j["num_ground_truth"] = report.num_ground_truth;
  j["num_predictions"] = report.num_predictions;
  json iou = json::object();
  for (const auto& [threshold, ap] : report.iou_ap) {
    char key[32];
    std::snprintf(key, sizeof(key), "%g", threshold);
    iou[key] = ap;
  }
  j["iou_ap"] = iou;
  json pose = json::object();
  for (const auto& [criterion, ap] : report.pose_ap) pose[criterion.name()] = ap;
  j["pose_ap"] = pose;
  j["chamfer_mean_x1e3"] = report.chamfer_mean_x1e3;
  // Higher is better (mean absolute normal cosine between nearest neighbors).
  j["normal_consistency"] = report.normal_consistency;
  json delta = json::object();
  for (const auto& [tau, pct] : report.depth.delta) {
    char key[32];
    std::snprintf(key, sizeof(key), "%g", tau);
    delta[key] = pct;
  }
  j["depth"] = {{"rmse_m", report.depth.rmse}, {"rel", report.depth.rel}, {"delta", delta}};

  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace mp
