#include <doctest.h>

#include "mp/rng.hpp"
#include "mp/types.hpp"

using namespace mp;

namespace {

TriangleMesh unit_tetrahedron() {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {0.2, 0, 0}, {0, 0.2, 0}, {0, 0, 0.2}};
  m.faces = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  return m;
}

}  // namespace

TEST_CASE("mesh validation rejects bad faces") {
  TriangleMesh m = unit_tetrahedron();
  CHECK_NOTHROW(validate_mesh(m));

  TriangleMesh out_of_range = m;
  out_of_range.faces.push_back({0, 1, 9});
  CHECK_THROWS_AS(validate_mesh(out_of_range), Error);

  TriangleMesh repeated = m;
  repeated.faces.push_back({1, 1, 2});
  CHECK_THROWS_AS(validate_mesh(repeated), Error);
}

TEST_CASE("normalized frame enforces the bounding-sphere radius") {
  TriangleMesh m;
  m.vertices = {{0.6, 0, 0}, {0, 0.1, 0}, {0, 0, 0.1}};
  m.faces = {{0, 1, 2}};
  m.frame = MeshFrame::Normalized;
  CHECK_THROWS_AS(validate_mesh(m), Error);
  m.frame = MeshFrame::CameraMetric;
  CHECK_NOTHROW(validate_mesh(m));
}

TEST_CASE("bounding sphere center of a cube is its midpoint") {
  std::vector<Eigen::Vector3d> pts;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) pts.emplace_back(1.0 + sx, 2.0 + sy, 3.0 + sz);
  const Eigen::Vector3d c = bounding_sphere_center(pts);
  CHECK((c - Eigen::Vector3d(1, 2, 3)).norm() < 1e-6);
}

TEST_CASE("bounding sphere is near-minimal on random clouds") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 200; ++i) {
      pts.emplace_back(rng.uniform(-1, 1) + 3.0, rng.uniform(-2, 2), rng.uniform(-0.5, 0.5));
    }
    const Eigen::Vector3d c = bounding_sphere_center(pts);
    double r = 0.0;
    for (const auto& p : pts) r = std::max(r, (p - c).norm());
    // Any center must beat half the diameter it covers; check we are within
    // a few percent of the best seen over random probes.
    double best = r;
    for (int probe = 0; probe < 50; ++probe) {
      Eigen::Vector3d cand = c + 0.1 * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
      double rr = 0.0;
      for (const auto& p : pts) rr = std::max(rr, (p - cand).norm());
      best = std::min(best, rr);
    }
    CHECK(r <= best * 1.02);
  }
}

TEST_CASE("normalize_mesh centers and scales to radius 0.5") {
  TriangleMesh m = unit_tetrahedron();
  for (auto& v : m.vertices) v += Eigen::Vector3d(5, -2, 7);
  const TriangleMesh n = normalize_mesh(m);
  CHECK(n.frame == MeshFrame::Normalized);
  CHECK(n.max_radius_about_origin() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(n.max_radius_about_origin() <= 0.5 + 1e-9);
  CHECK_NOTHROW(validate_mesh(n));
}

TEST_CASE("boundary edge detection") {
  TriangleMesh open;
  open.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  open.faces = {{0, 1, 2}};
  open.frame = MeshFrame::CameraMetric;
  CHECK(has_boundary_edges(open));
  CHECK_FALSE(has_boundary_edges(unit_tetrahedron()));
}

TEST_CASE("similarity compose and inverse") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    SimilarityTransform t1{rng.uniform(0.2, 3.0), rng.rotation(),
                           {rng.normal(), rng.normal(), rng.normal()}};
    SimilarityTransform t2{rng.uniform(0.2, 3.0), rng.rotation(),
                           {rng.normal(), rng.normal(), rng.normal()}};
    const Eigen::Vector3d p(rng.normal(), rng.normal(), rng.normal());

    const Eigen::Vector3d via_compose = t2.compose(t1).apply(p);
    const Eigen::Vector3d stepwise = t2.apply(t1.apply(p));
    CHECK((via_compose - stepwise).norm() < 1e-12);

    const Eigen::Vector3d back = t1.inverse().apply(t1.apply(p));
    CHECK((back - p).norm() < 1e-10);
  }
}

TEST_CASE("intrinsics validation") {
  CameraIntrinsics k{500, 500, 320, 240, 640, 480};
  CHECK_NOTHROW(validate_intrinsics(k));
  k.fx = -1;
  CHECK_THROWS_AS(validate_intrinsics(k), Error);
  k = {500, 500, 700, 240, 640, 480};
  CHECK_THROWS_AS(validate_intrinsics(k), Error);
}

TEST_CASE("oriented box contains and corners") {
  OrientedBox3D box;
  box.center = {1, 0, 0};
  box.half_extents = {1, 2, 3};
  CHECK(box.contains({1.5, 1.5, -2.5}));
  CHECK_FALSE(box.contains({2.5, 0, 0}));
  CHECK(box.volume() == doctest::Approx(48.0));

  Eigen::AlignedBox3d bounds;
  for (const auto& c : box.corners()) bounds.extend(c);
  CHECK((bounds.min() - Eigen::Vector3d(0, -2, -3)).norm() < 1e-12);
  CHECK((bounds.max() - Eigen::Vector3d(2, 2, 3)).norm() < 1e-12);
}

TEST_CASE("bounding box helpers") {
  BoundingBox2D b{10, 20, 30, 40};
  CHECK(b.longer_side() == 40);
  CHECK((b.center() - Eigen::Vector2d(25, 40)).norm() < 1e-12);
}
