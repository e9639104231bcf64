#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mp/metrics.hpp"
#include "mp/types.hpp"

namespace mp {

/// One detected/ground-truth object inside an image record. File references
/// are relative to the record's directory. `gt_pose` is ground truth;
/// `pose` is a prediction (solver output). Records acting as predictions
/// without an explicit `pose` fall back to `gt_pose`.
struct ObjectRecord {
  std::string category;
  BoundingBox2D bbox;
  double z_center = 0.0;
  double radius = 0.0;
  std::string mesh_file;
  std::string nocs_file;
  std::string depth_file;
  std::string mask_file;
  std::optional<SimilarityTransform> gt_pose;
  std::optional<SimilarityTransform> pose;
  std::optional<double> score;
  std::optional<std::string> metric_mesh_file;     // solver: final lifted mesh
  std::optional<std::string> rendered_depth_file;  // solver: final rendered depth
};

struct ImageRecord {
  std::string image_id;
  CameraIntrinsics intrinsics;
  std::vector<ObjectRecord> objects;
};

/// check_files verifies that every referenced file exists next to the record.
ImageRecord load_record(const std::filesystem::path& path, bool check_files = true);
void save_record(const std::filesystem::path& path, const ImageRecord& record);

/// All scene record files under a dataset root (<root>/<scene>/record.json),
/// sorted by scene directory name.
std::vector<std::filesystem::path> find_records(const std::filesystem::path& root);

void save_report(const std::filesystem::path& path, const MetricReport& report);

}  // namespace mp
