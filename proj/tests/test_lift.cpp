#include <doctest.h>

#include "mp/lift.hpp"
#include "mp/rng.hpp"
#include "mp/synth.hpp"

using namespace mp;

namespace {

const CameraIntrinsics kCam{500.0, 500.0, 320.0, 240.0, 640, 480};

TriangleMesh normalized_cube() {
  TriangleMesh m;
  const double h = 0.5 / std::sqrt(3.0);  // corners on the radius-0.5 sphere
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) m.vertices.emplace_back(sx * h, sy * h, sz * h);
  m.faces = {{0, 1, 3}, {0, 3, 2}, {4, 6, 7}, {4, 7, 5}, {0, 4, 5}, {0, 5, 1},
             {2, 3, 7}, {2, 7, 6}, {0, 2, 6}, {0, 6, 4}, {1, 5, 7}, {1, 7, 3}};
  m.frame = MeshFrame::Normalized;
  return m;
}

BoundingBox2D box_centered(double u, double v, double side) {
  return {u - side / 2, v - side / 2, side, side};
}

}  // namespace

TEST_CASE("backprojection basics") {
  CHECK((backproject_pixel(kCam.cx, kCam.cy, 3.0, kCam) - Eigen::Vector3d(0, 0, 3)).norm() <
        1e-15);

  CameraIntrinsics k{500.0, 500.0, 0.0, 0.0, 1000, 1000};
  CHECK((backproject_pixel(500.0, 0.0, 2.0, k) - Eigen::Vector3d(2, 0, 2)).norm() < 1e-15);
}

TEST_CASE("project then backproject is the identity on pixels") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const double u = rng.uniform(0, kCam.width);
    const double v = rng.uniform(0, kCam.height);
    const double d = rng.uniform(0.1, 10.0);
    const Eigen::Vector2d uv = kCam.project(backproject_pixel(u, v, d, kCam));
    CHECK(std::abs(uv.x() - u) < 1e-9);
    CHECK(std::abs(uv.y() - v) < 1e-9);
  }
}

TEST_CASE("on-axis lift lands at the backprojected center") {
  LiftInputs in;
  in.mesh = normalized_cube();
  in.bbox = box_centered(kCam.cx, kCam.cy, 100);
  in.z_center = 2.0;
  in.radius = 0.5;
  in.intrinsics = kCam;

  const TriangleMesh lifted = lift_to_metric(in);
  CHECK(lifted.frame == MeshFrame::CameraMetric);
  const Eigen::Vector3d center = bounding_sphere_center(lifted.vertices);
  CHECK((center - Eigen::Vector3d(0, 0, 2)).norm() < 1e-9);
  double r = 0.0;
  for (const auto& v : lifted.vertices) r = std::max(r, (v - Eigen::Vector3d(0, 0, 2)).norm());
  CHECK(r == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("off-axis lift follows the pixel ray") {
  LiftInputs in;
  in.mesh = normalized_cube();
  in.bbox = box_centered(kCam.cx + 100, kCam.cy, 80);
  in.z_center = 2.0;
  in.radius = 0.25;
  in.intrinsics = kCam;

  const SimilarityTransform t = lift_transform(in);
  CHECK((t.translation - Eigen::Vector3d(0.4, 0, 2)).norm() < 1e-9);
  CHECK(t.scale == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("radius 0.5 at depth 1 is a pure translation") {
  LiftInputs in;
  in.mesh = normalized_cube();
  in.bbox = box_centered(kCam.cx, kCam.cy, 200);
  in.z_center = 1.0;
  in.radius = 0.5;
  in.intrinsics = kCam;

  const SimilarityTransform t = lift_transform(in);
  CHECK(t.scale == doctest::Approx(1.0).epsilon(1e-9));
  CHECK((t.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-9);
  CHECK((t.translation - Eigen::Vector3d(0, 0, 1)).norm() < 1e-9);
}

TEST_CASE("corner solve agrees with the closed form on random inputs") {
  Rng rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    LiftInputs in;
    in.mesh = normalized_cube();
    in.bbox = {rng.uniform(0, 400), rng.uniform(0, 300), rng.uniform(5, 200),
               rng.uniform(5, 150)};
    in.z_center = rng.uniform(0.3, 5.0);
    in.radius = rng.uniform(0.02, 0.5);
    in.intrinsics = kCam;

    const SimilarityTransform t = lift_transform(in);
    const Eigen::Vector2d c = in.bbox.center();
    const Eigen::Vector3d expected_t = backproject_pixel(c.x(), c.y(), in.z_center, kCam);
    CHECK(std::abs(t.scale - 2.0 * in.radius) < 1e-9 * (1.0 + 2.0 * in.radius));
    CHECK((t.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-9);
    CHECK((t.translation - expected_t).norm() < 1e-9 * (1.0 + expected_t.norm()));
  }
}

TEST_CASE("lift preserves the bounding-sphere radius on category meshes") {
  Rng rng(33);
  for (const auto& category : category_names()) {
    LiftInputs in;
    in.mesh = make_category_mesh(category, {}, 24);
    in.bbox = box_centered(rng.uniform(100, 540), rng.uniform(100, 380), rng.uniform(20, 150));
    in.z_center = rng.uniform(0.5, 3.0);
    in.radius = rng.uniform(0.05, 0.3);
    in.intrinsics = kCam;

    const TriangleMesh lifted = lift_to_metric(in);
    const Eigen::Vector2d c = in.bbox.center();
    const Eigen::Vector3d center = backproject_pixel(c.x(), c.y(), in.z_center, kCam);
    double r = 0.0;
    for (const auto& v : lifted.vertices) r = std::max(r, (v - center).norm());
    CHECK(std::abs(r - in.radius) < 1e-9);

    // Projection consistency: the lifted center projects back onto the bbox
    // center pixel.
    const Eigen::Vector2d reproj = kCam.project(center);
    CHECK((reproj - c).norm() < 1e-6);
  }
}

TEST_CASE("lift validates its inputs") {
  LiftInputs in;
  in.mesh = normalized_cube();
  in.bbox = box_centered(320, 240, 100);
  in.z_center = -1.0;
  in.radius = 0.1;
  in.intrinsics = kCam;
  CHECK_THROWS_AS(lift_to_metric(in), Error);

  in.z_center = 1.0;
  in.mesh.frame = MeshFrame::CameraMetric;
  CHECK_THROWS_AS(lift_to_metric(in), Error);
}
