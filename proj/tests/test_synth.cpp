#include <doctest.h>

#include "mp/lift.hpp"
#include "mp/metrics.hpp"
#include "mp/pose.hpp"
#include "mp/rng.hpp"
#include "mp/synth.hpp"

using namespace mp;

namespace {
const CameraIntrinsics kCam{600.0, 600.0, 320.0, 240.0, 640, 480};
}

TEST_CASE("category meshes are normalized and well-formed") {
  for (const auto& category : category_names()) {
    const TriangleMesh m = make_category_mesh(category, {}, 24);
    CHECK(m.frame == MeshFrame::Normalized);
    CHECK_NOTHROW(validate_mesh(m));
    const double r = m.max_radius_about_origin();
    CHECK(r <= 0.5 + 1e-9);
    CHECK(r >= 0.45);
  }
  CHECK_THROWS_AS(make_category_mesh("spoon", {}, 24), Error);
}

TEST_CASE("bowl is open while bottle is closed") {
  CHECK(has_boundary_edges(make_category_mesh("bowl", {}, 24)));
  CHECK_FALSE(has_boundary_edges(make_category_mesh("bottle", {}, 24)));
  CHECK(has_boundary_edges(make_category_mesh("mug", {}, 24)));  // open top
}

TEST_CASE("subdivision refinement converges in chamfer distance") {
  for (const auto& category : category_names()) {
    const TriangleMesh coarse = make_category_mesh(category, {}, 24);
    const TriangleMesh fine = make_category_mesh(category, {}, 48);
    const auto sc = sample_surface(coarse, 4000, 5);
    const auto sf = sample_surface(fine, 4000, 6);
    std::vector<Eigen::Vector3d> pc, pf;
    for (const auto& s : sc) pc.push_back(s.position);
    for (const auto& s : sf) pf.push_back(s.position);
    CHECK(chamfer_distance(pc, pf) < 1e-3);
  }
}

TEST_CASE("scene sampler keeps objects inside the frustum at tabletop depths") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SceneSpec scene = sample_scene(seed, kCam, 1, 3);
    REQUIRE(!scene.objects.empty());
    for (const auto& obj : scene.objects) {
      const double z = obj.gt_pose.translation.z();
      CHECK(z >= 0.6);
      CHECK(z <= 3.0);
      const double radius = 0.5 * obj.gt_pose.scale;
      const Eigen::Vector2d center = kCam.project(obj.gt_pose.translation);
      const double r_px = kCam.fx * radius / z;
      CHECK(center.x() - r_px >= 0.0);
      CHECK(center.x() + r_px <= kCam.width);
      CHECK(center.y() - r_px >= 0.0);
      CHECK(center.y() + r_px <= kCam.height);
    }
  }
}

TEST_CASE("single centered object renders with the expected bbox and scalars") {
  SceneSpec scene;
  scene.intrinsics = kCam;
  SceneObject obj;
  obj.category = "can";
  obj.subdivisions = 24;
  obj.gt_pose.scale = 0.3;  // radius 0.15
  obj.gt_pose.translation = {0.0, 0.0, 2.0};
  scene.objects.push_back(obj);

  const auto bundles = render_ground_truth(scene);
  REQUIRE(bundles[0].has_value());
  const GroundTruthObject& g = *bundles[0];
  CHECK(g.z_center == doctest::Approx(2.0));
  CHECK(g.radius == doctest::Approx(0.15));
  const Eigen::Vector2d c = g.bbox.center();
  CHECK(std::abs(c.x() - kCam.cx) < 2.0);
  CHECK(std::abs(c.y() - kCam.cy) < 2.0);
  CHECK(g.mask.count() > 500);
  CHECK(g.input_mesh.frame == MeshFrame::Normalized);
}

TEST_CASE("rendered map pairs satisfy the defining pose identity") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const SceneSpec scene = sample_scene(seed, kCam, 1, 2);
    const auto bundles = render_ground_truth(scene);
    for (const auto& b : bundles) {
      if (!b) continue;
      const auto corr = build_correspondences(b->nocs, b->depth, b->mask, kCam);
      for (const auto& c : corr) {
        CHECK((b->gt_pose.apply(c.object_point) - c.camera_point).norm() < 1e-6);
      }
    }
  }
}

TEST_CASE("a fully hidden object comes back empty") {
  SceneSpec scene;
  scene.intrinsics = kCam;
  SceneObject front, back;
  front.category = "laptop";
  front.subdivisions = 16;
  front.gt_pose.scale = 0.8;
  front.gt_pose.translation = {0.0, 0.0, 1.0};
  back.category = "can";
  back.subdivisions = 16;
  back.gt_pose.scale = 0.05;  // small and far, entirely behind the laptop
  back.gt_pose.translation = {0.0, 0.0, 2.5};
  scene.objects = {front, back};

  const auto bundles = render_ground_truth(scene);
  CHECK(bundles[0].has_value());
  CHECK_FALSE(bundles[1].has_value());
}

TEST_CASE("ground-truth rendering is deterministic") {
  const SceneSpec scene = sample_scene(17, kCam, 2, 2);
  const auto a = render_ground_truth(scene);
  const auto b = render_ground_truth(scene, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].has_value() == b[i].has_value());
    if (!a[i]) continue;
    CHECK(a[i]->depth.data == b[i]->depth.data);
    CHECK(a[i]->nocs.data == b[i]->nocs.data);
    CHECK(a[i]->mask.data == b[i]->mask.data);
  }
}

TEST_CASE("zero perturbation is the identity") {
  const SceneSpec scene = sample_scene(21, kCam, 1, 1);
  const auto bundles = render_ground_truth(scene);
  REQUIRE(bundles[0].has_value());
  const GroundTruthObject& g = *bundles[0];
  const GroundTruthObject p = perturb(g, {}, 7);
  CHECK(p.z_center == g.z_center);
  CHECK(p.radius == g.radius);
  CHECK(p.nocs.data == g.nocs.data);
  CHECK(p.mask.data == g.mask.data);
}

TEST_CASE("perturbation is seed-deterministic and respects the outlier budget") {
  SceneSpec scene;
  scene.intrinsics = kCam;
  SceneObject obj;
  obj.category = "laptop";
  obj.subdivisions = 16;
  obj.gt_pose.scale = 0.6;
  obj.gt_pose.translation = {0.0, 0.0, 1.2};
  scene.objects.push_back(obj);
  const auto bundles = render_ground_truth(scene);
  REQUIRE(bundles[0].has_value());
  const GroundTruthObject& g = *bundles[0];
  REQUIRE(g.mask.count() > 10000);

  PerturbationSpec spec;
  spec.nocs_outlier_frac = 0.3;
  const GroundTruthObject p1 = perturb(g, spec, 123);
  const GroundTruthObject p2 = perturb(g, spec, 123);
  CHECK(p1.nocs.data == p2.nocs.data);

  int replaced = 0, total = 0;
  for (int y = 0; y < g.nocs.height; ++y) {
    for (int x = 0; x < g.nocs.width; ++x) {
      if (!g.nocs.is_valid(x, y)) continue;
      ++total;
      for (int ch = 0; ch < 3; ++ch) {
        if (p1.nocs.at(x, y, ch) != g.nocs.at(x, y, ch)) {
          ++replaced;
          break;
        }
      }
    }
  }
  const double fraction = double(replaced) / double(total);
  CHECK(fraction > 0.28);
  CHECK(fraction < 0.32);

  PerturbationSpec erode_spec;
  erode_spec.mask_erosion_px = 2.0;
  const GroundTruthObject pe = perturb(g, erode_spec, 5);
  CHECK(pe.mask.count() < g.mask.count());
}

TEST_CASE("scalar noise stays within the stated relative bounds") {
  const SceneSpec scene = sample_scene(33, kCam, 1, 1);
  const auto bundles = render_ground_truth(scene);
  REQUIRE(bundles[0].has_value());
  const GroundTruthObject& g = *bundles[0];
  PerturbationSpec spec;
  spec.z_rel_noise = 0.2;
  spec.r_rel_noise = 0.1;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const GroundTruthObject p = perturb(g, spec, seed);
    CHECK(std::abs(p.z_center / g.z_center - 1.0) <= 0.2);
    CHECK(std::abs(p.radius / g.radius - 1.0) <= 0.1);
  }
}
