#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mp/float_map.hpp"
#include "mp/metrics.hpp"
#include "mp/obj_io.hpp"
#include "mp/records.hpp"
#include "mp/rng.hpp"
#include "mp/synth.hpp"

using namespace mp;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "mp_io_tests";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("float map round trip preserves values and validity") {
  Rng rng(61);
  for (int channels : {1, 3}) {
    ImageGrid grid = ImageGrid::make(17, 9, channels);
    for (int y = 0; y < grid.height; ++y) {
      for (int x = 0; x < grid.width; ++x) {
        if (rng.next_double() < 0.3) continue;  // leave invalid
        for (int c = 0; c < channels; ++c) {
          grid.at(x, y, c) = float(rng.uniform(-10, 10));
        }
        grid.set_valid(x, y, true);
      }
    }
    const fs::path path = temp_dir() / ("roundtrip_" + std::to_string(channels) + ".mpf");
    save_float_map(path, grid);
    const ImageGrid back = load_float_map(path);
    CHECK(back.width == grid.width);
    CHECK(back.height == grid.height);
    CHECK(back.channels == grid.channels);
    CHECK(back.data == grid.data);
    CHECK(back.valid == grid.valid);
  }
}

TEST_CASE("float map writes are byte-identical") {
  ImageGrid grid = ImageGrid::make(5, 5, 1);
  grid.at(2, 2) = 1.25f;
  grid.set_valid(2, 2, true);
  const fs::path p1 = temp_dir() / "det_a.mpf";
  const fs::path p2 = temp_dir() / "det_b.mpf";
  save_float_map(p1, grid);
  save_float_map(p2, grid);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string s1((std::istreambuf_iterator<char>(f1)), {});
  const std::string s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);
  CHECK(s1.size() == 4 + 12 + 25 * 4);
}

TEST_CASE("float map loader rejects corrupt files") {
  const fs::path bad_magic = temp_dir() / "bad_magic.mpf";
  std::ofstream(bad_magic, std::ios::binary) << "NOPE";
  CHECK_THROWS_AS(load_float_map(bad_magic), Error);

  ImageGrid grid = ImageGrid::make(4, 4, 1);
  const fs::path truncated = temp_dir() / "short.mpf";
  save_float_map(truncated, grid);
  fs::resize_file(truncated, 20);
  CHECK_THROWS_AS(load_float_map(truncated), Error);
}

TEST_CASE("mask round trip through a grid") {
  BoolImage mask = BoolImage::make(6, 4, false);
  mask.set(1, 1, true);
  mask.set(5, 3, true);
  const BoolImage back = mask_from_grid(grid_from_mask(mask));
  CHECK(back.data == mask.data);
}

TEST_CASE("obj reader handles triangles, quads and junk records") {
  const fs::path path = temp_dir() / "tri.obj";
  std::ofstream(path) << "# comment\n"
                         "v 0 0 1\n"
                         "v 1 0 1\n"
                         "v 1 1 1\n"
                         "v 0 1 1\n"
                         "vn 0 0 1\n"
                         "usemtl whatever\n"
                         "f 1/1 2/2 3/3 4/4\n";
  const TriangleMesh mesh = load_obj(path, MeshFrame::CameraMetric);
  CHECK(mesh.vertices.size() == 4);
  REQUIRE(mesh.faces.size() == 2);  // fan triangulation
  CHECK(mesh.faces[0] == std::array<int, 3>{0, 1, 2});
  CHECK(mesh.faces[1] == std::array<int, 3>{0, 2, 3});
}

TEST_CASE("obj reader reports line numbers on errors") {
  const fs::path bad = temp_dir() / "bad.obj";
  std::ofstream(bad) << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 oops\n";
  try {
    load_obj(bad);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find(":4:") != std::string::npos);
  }

  const fs::path out_of_range = temp_dir() / "oor.obj";
  std::ofstream(out_of_range) << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n";
  try {
    load_obj(out_of_range);
    FAIL("expected IndexOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IndexOutOfRange);
  }
}

TEST_CASE("large mesh survives a save/load round trip") {
  const TriangleMesh mesh = make_category_mesh("mug", {}, 64);
  CHECK(mesh.vertices.size() > 5000);
  const fs::path path = temp_dir() / "big.obj";
  save_obj(path, mesh);
  const TriangleMesh back = load_obj(path, MeshFrame::Normalized);
  REQUIRE(back.vertices.size() == mesh.vertices.size());
  CHECK(back.faces == mesh.faces);
  double worst = 0.0;
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    worst = std::max(worst, (mesh.vertices[i] - back.vertices[i]).norm());
  }
  CHECK(worst == 0.0);  // full double precision is written

  std::vector<Eigen::Vector3d> a = mesh.vertices, b = back.vertices;
  CHECK(chamfer_distance(a, b) == doctest::Approx(0.0));
}

TEST_CASE("record save/load round trip") {
  const fs::path dir = temp_dir() / "scene_xyz";
  fs::create_directories(dir);
  save_obj(dir / "m.obj", make_category_mesh("can", {}, 12));
  ImageGrid g = ImageGrid::make(4, 4, 1);
  g.at(0, 0) = 1.0f;
  g.set_valid(0, 0, true);
  save_float_map(dir / "n.mpf", g);
  save_float_map(dir / "d.mpf", g);
  save_float_map(dir / "k.mpf", g);

  ImageRecord rec;
  rec.image_id = "scene_xyz";
  rec.intrinsics = {500, 501, 320, 240, 640, 480};
  ObjectRecord obj;
  obj.category = "can";
  obj.bbox = {10, 20, 30, 40};
  obj.z_center = 1.5;
  obj.radius = 0.12;
  obj.mesh_file = "m.obj";
  obj.nocs_file = "n.mpf";
  obj.depth_file = "d.mpf";
  obj.mask_file = "k.mpf";
  Rng rng(62);
  obj.gt_pose = SimilarityTransform{0.24, rng.rotation(), {0.1, 0.2, 1.5}};
  obj.score = 0.9;
  rec.objects.push_back(obj);

  save_record(dir / "record.json", rec);
  const ImageRecord back = load_record(dir / "record.json");
  CHECK(back.image_id == rec.image_id);
  CHECK(back.intrinsics.fy == rec.intrinsics.fy);
  REQUIRE(back.objects.size() == 1);
  CHECK(back.objects[0].category == "can");
  CHECK(back.objects[0].bbox.w == 30);
  CHECK(back.objects[0].z_center == 1.5);
  REQUIRE(back.objects[0].gt_pose.has_value());
  CHECK((back.objects[0].gt_pose->rotation - obj.gt_pose->rotation).norm() < 1e-12);
  CHECK(back.objects[0].score == 0.9);

  // A record pointing at a missing file fails the existence check.
  rec.objects[0].mesh_file = "missing.obj";
  save_record(dir / "record2.json", rec);
  CHECK_THROWS_AS(load_record(dir / "record2.json"), Error);
  CHECK_NOTHROW(load_record(dir / "record2.json", false));
}

TEST_CASE("record loader rejects non-orthonormal rotations") {
  const fs::path dir = temp_dir() / "scene_rot";
  fs::create_directories(dir);
  std::ofstream(dir / "record.json")
      << R"({"image_id":"scene_rot","intrinsics":{"fx":500,"fy":500,"cx":320,"cy":240,)"
      << R"("width":640,"height":480},"objects":[{"category":"can","bbox":[0,0,10,10],)"
      << R"("z_center":1.0,"radius":0.1,"files":{"mesh":"m.obj","nocs":"n.mpf",)"
      << R"("depth":"d.mpf","mask":"k.mpf"},)"
      << R"("gt_pose":{"scale":1.0,"rotation":[2,0,0,0,1,0,0,0,1],"translation":[0,0,1]}}]})";
  CHECK_THROWS_AS(load_record(dir / "record.json", false), Error);
}

TEST_CASE("report serialization shape") {
  MetricReport report;
  report.iou_ap[0.25] = 100.0;
  report.pose_ap.emplace_back(ApCriterion::pose(5.0, 5.0), 99.0);
  report.pose_ap.emplace_back(ApCriterion::pose({}, 10.0), 98.0);
  report.depth.delta[1.25] = 97.0;
  const fs::path path = temp_dir() / "report.json";
  save_report(path, report);
  std::ifstream in(path);
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text.find("\"iou_ap\"") != std::string::npos);
  CHECK(text.find("\"5deg_5cm\"") != std::string::npos);
  CHECK(text.find("\"10cm\"") != std::string::npos);
  CHECK(text.find("\"1.25\"") != std::string::npos);
}
