#include "mp/synth.hpp"

#include <algorithm>
#include <cmath>

#include "mp/rng.hpp"

namespace mp {

const std::vector<std::string>& category_names() {
  static const std::vector<std::string> names = {"bottle", "bowl",   "camera",
                                                 "can",    "laptop", "mug"};
  return names;
}

namespace {

// Capped or open-top cylinder, axis +y, centered at the origin.
TriangleMesh make_cylinder(double radius, double half_height, int segments, bool cap_top,
                           bool cap_bottom) {
  TriangleMesh m;
  const int n = std::max(segments, 8);
  for (int ring = 0; ring < 2; ++ring) {
    const double y = ring == 0 ? half_height : -half_height;
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * M_PI * i / n;
      m.vertices.emplace_back(radius * std::cos(a), y, radius * std::sin(a));
    }
  }
  auto top = [&](int i) { return i % n; };
  auto bottom = [&](int i) { return n + i % n; };
  for (int i = 0; i < n; ++i) {
    m.faces.push_back({top(i), bottom(i), bottom(i + 1)});
    m.faces.push_back({top(i), bottom(i + 1), top(i + 1)});
  }
  if (cap_top) {
    const int c = int(m.vertices.size());
    m.vertices.emplace_back(0.0, half_height, 0.0);
    for (int i = 0; i < n; ++i) m.faces.push_back({c, top(i), top(i + 1)});
  }
  if (cap_bottom) {
    const int c = int(m.vertices.size());
    m.vertices.emplace_back(0.0, -half_height, 0.0);
    for (int i = 0; i < n; ++i) m.faces.push_back({c, bottom(i + 1), bottom(i)});
  }
  return m;
}

// Open hemisphere opening toward +y: rim circle at y = 0, dome dipping to -r.
TriangleMesh make_bowl(double radius, double depth_scale, int segments) {
  TriangleMesh m;
  const int n = std::max(segments, 8);
  const int rings = std::max(n / 4, 4);
  for (int r = 0; r < rings; ++r) {
    const double t = 0.5 * M_PI * r / rings;
    const double ring_r = radius * std::cos(t);
    const double y = -radius * depth_scale * std::sin(t);
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * M_PI * i / n;
      m.vertices.emplace_back(ring_r * std::cos(a), y, ring_r * std::sin(a));
    }
  }
  const int pole = int(m.vertices.size());
  m.vertices.emplace_back(0.0, -radius * depth_scale, 0.0);
  auto at = [&](int r, int i) { return r * n + i % n; };
  for (int r = 0; r + 1 < rings; ++r) {
    for (int i = 0; i < n; ++i) {
      m.faces.push_back({at(r, i), at(r + 1, i), at(r + 1, i + 1)});
      m.faces.push_back({at(r, i), at(r + 1, i + 1), at(r, i + 1)});
    }
  }
  for (int i = 0; i < n; ++i) m.faces.push_back({at(rings - 1, i), pole, at(rings - 1, i + 1)});
  return m;
}

TriangleMesh make_box(double ex, double ey, double ez) {
  TriangleMesh m;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) m.vertices.emplace_back(sx * ex, sy * ey, sz * ez);
  // Corner order: index bit2 = x, bit1 = y, bit0 = z (negative first).
  const int quads[6][4] = {{0, 1, 3, 2}, {4, 6, 7, 5}, {0, 4, 5, 1},
                           {2, 3, 7, 6}, {0, 2, 6, 4}, {1, 5, 7, 3}};
  for (const auto& q : quads) {
    m.faces.push_back({q[0], q[1], q[2]});
    m.faces.push_back({q[0], q[2], q[3]});
  }
  return m;
}

// Half-torus handle in the x-y plane, opening toward -x, ends embedded in the
// body wall at x = attach_x.
void add_handle(TriangleMesh& m, double attach_x, double ring_r, double tube_r,
                int sweep_segments, int tube_segments) {
  const int base = int(m.vertices.size());
  const int ns = std::max(sweep_segments, 6);
  const int nt = std::max(tube_segments, 6);
  for (int s = 0; s <= ns; ++s) {
    const double theta = -0.5 * M_PI + M_PI * s / ns;
    for (int t = 0; t < nt; ++t) {
      const double phi = 2.0 * M_PI * t / nt;
      const double rr = ring_r + tube_r * std::cos(phi);
      m.vertices.emplace_back(attach_x + rr * std::cos(theta), rr * std::sin(theta),
                              tube_r * std::sin(phi));
    }
  }
  auto at = [&](int s, int t) { return base + s * nt + t % nt; };
  for (int s = 0; s < ns; ++s) {
    for (int t = 0; t < nt; ++t) {
      m.faces.push_back({at(s, t), at(s + 1, t), at(s + 1, t + 1)});
      m.faces.push_back({at(s, t), at(s + 1, t + 1), at(s, t + 1)});
    }
  }
}

}  // namespace

TriangleMesh make_category_mesh(const std::string& category, const ShapeParams& params,
                                int subdivisions) {
  const int n = std::max(subdivisions, 8);
  TriangleMesh m;
  if (category == "bottle") {
    m = make_cylinder(0.22 * params.detail, 0.55 * params.aspect, n, true, true);
  } else if (category == "can") {
    m = make_cylinder(0.32 * params.detail, 0.38 * params.aspect, n, true, true);
  } else if (category == "bowl") {
    m = make_bowl(0.5, 0.8 * params.aspect, n);
  } else if (category == "laptop") {
    m = make_box(0.50, 0.045 * params.aspect, 0.35);
  } else if (category == "camera") {
    m = make_box(0.30, 0.20 * params.aspect, 0.17);
  } else if (category == "mug") {
    m = make_cylinder(0.33, 0.38 * params.aspect, n, false, true);
    add_handle(m, 0.33, 0.21 * params.detail, 0.065 * params.detail, std::max(n / 2, 8),
               std::max(n / 3, 8));
  } else {
    fail(ErrorCode::UnknownCategory, "unknown category: " + category);
  }
  TriangleMesh out = normalize_mesh(m);
  validate_mesh(out);
  return out;
}

SceneSpec sample_scene(std::uint64_t seed, const CameraIntrinsics& intrinsics,
                       int min_objects, int max_objects, int subdivisions) {
  validate_intrinsics(intrinsics);
  if (min_objects < 1 || max_objects < min_objects) {
    fail(ErrorCode::InvalidInput, "invalid object count range");
  }
  SceneSpec scene;
  scene.seed = seed;
  scene.intrinsics = intrinsics;

  Rng rng = Rng::substream(seed, 0x5C3BE);
  const int want = min_objects + int(rng.next_below(std::uint64_t(max_objects - min_objects + 1)));

  struct Placed {
    double u, v, r_px;
  };
  std::vector<Placed> placed;

  const auto& names = category_names();
  for (int k = 0; k < want; ++k) {
    bool ok = false;
    for (int attempt = 0; attempt < 128 && !ok; ++attempt) {
      const double z = rng.uniform(0.6, 3.0);
      // Keep the projected sphere a comfortable on-screen size; far objects
      // must be physically larger, as with real tabletop detections.
      const double r_min = std::max(0.05, 28.0 * z / intrinsics.fx);
      const double r_max = std::max(r_min * 1.2, 0.18);
      const double radius = rng.uniform(r_min, r_max);
      const double r_px_x = intrinsics.fx * radius / z;
      const double r_px_y = intrinsics.fy * radius / z;
      const double margin = 12.0;
      const double lo_u = r_px_x + margin, hi_u = intrinsics.width - r_px_x - margin;
      const double lo_v = r_px_y + margin, hi_v = intrinsics.height - r_px_y - margin;
      if (lo_u >= hi_u || lo_v >= hi_v) continue;
      const double u = rng.uniform(lo_u, hi_u);
      const double v = rng.uniform(lo_v, hi_v);

      bool overlaps = false;
      for (const auto& p : placed) {
        const double du = u - p.u, dv = v - p.v;
        const double rs = std::max(r_px_x, r_px_y) + p.r_px + 8.0;
        if (du * du + dv * dv < rs * rs) {
          overlaps = true;
          break;
        }
      }
      if (overlaps) continue;

      SceneObject obj;
      obj.category = names[rng.next_below(names.size())];
      obj.params.aspect = rng.uniform(0.85, 1.2);
      obj.params.detail = rng.uniform(0.85, 1.15);
      obj.subdivisions = subdivisions;
      obj.gt_pose.scale = 2.0 * radius;
      obj.gt_pose.rotation = rng.rotation();
      obj.gt_pose.translation =
          Eigen::Vector3d((u - intrinsics.cx) * z / intrinsics.fx,
                          (v - intrinsics.cy) * z / intrinsics.fy, z);
      scene.objects.push_back(obj);
      placed.push_back({u, v, std::max(r_px_x, r_px_y)});
      ok = true;
    }
  }
  if (scene.objects.empty()) fail(ErrorCode::InvalidInput, "scene sampling produced no objects");
  return scene;
}

std::vector<std::optional<GroundTruthObject>> render_ground_truth(const SceneSpec& scene,
                                                                  int threads) {
  validate_intrinsics(scene.intrinsics);
  const int w = scene.intrinsics.width, h = scene.intrinsics.height;
  const int count = int(scene.objects.size());

  std::vector<std::optional<DepthAttributeRender>> renders(count);
  std::vector<TriangleMesh> canonical(count);
  for (int i = 0; i < count; ++i) {
    const auto& obj = scene.objects[i];
    validate_similarity(obj.gt_pose);
    canonical[i] = make_category_mesh(obj.category, obj.params, obj.subdivisions);
    const TriangleMesh posed =
        transform_mesh(canonical[i], obj.gt_pose, MeshFrame::CameraMetric);
    std::vector<Eigen::Vector3d> attrs;
    attrs.reserve(canonical[i].vertices.size());
    for (const auto& v : canonical[i].vertices) {
      attrs.push_back(v + Eigen::Vector3d(0.5, 0.5, 0.5));
    }
    try {
      renders[i] = render_depth_attributes(posed, attrs, scene.intrinsics, threads);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyRender) throw;
    }
  }

  // Joint occlusion: each pixel belongs to the nearest covering object.
  std::vector<int> winner(std::size_t(w) * h, -1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float best = 0.0f;
      int who = -1;
      for (int i = 0; i < count; ++i) {
        if (!renders[i] || !renders[i]->depth.is_valid(x, y)) continue;
        const float d = renders[i]->depth.at(x, y);
        if (who < 0 || d < best) {
          best = d;
          who = i;
        }
      }
      winner[std::size_t(y) * w + x] = who;
    }
  }

  std::vector<std::optional<GroundTruthObject>> out(count);
  for (int i = 0; i < count; ++i) {
    if (!renders[i]) continue;
    GroundTruthObject g;
    g.object_index = i;
    g.mask = BoolImage::make(w, h, false);
    g.depth = ImageGrid::make(w, h, 1);
    g.nocs = ImageGrid::make(w, h, 3);
    int min_x = w, max_x = -1, min_y = h, max_y = -1;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (winner[std::size_t(y) * w + x] != i) continue;
        g.mask.set(x, y, true);
        g.depth.at(x, y) = renders[i]->depth.at(x, y);
        g.depth.set_valid(x, y, true);
        for (int c = 0; c < 3; ++c) g.nocs.at(x, y, c) = renders[i]->attributes.at(x, y, c);
        g.nocs.set_valid(x, y, true);
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
      }
    }
    if (max_x < 0) continue;  // fully occluded

    const auto& obj = scene.objects[i];
    g.bbox = {double(min_x), double(min_y), double(max_x - min_x + 1),
              double(max_y - min_y + 1)};
    const Eigen::Vector2d center_px = scene.intrinsics.project(obj.gt_pose.translation);
    g.detector_bbox = {center_px.x() - 0.5 * g.bbox.w, center_px.y() - 0.5 * g.bbox.h,
                       g.bbox.w, g.bbox.h};
    g.z_center = obj.gt_pose.translation.z();
    g.radius = 0.5 * obj.gt_pose.scale;
    g.gt_pose = obj.gt_pose;
    g.category = obj.category;

    SimilarityTransform view_align;  // rotation only
    view_align.rotation = obj.gt_pose.rotation;
    g.input_mesh = transform_mesh(canonical[i], view_align, MeshFrame::Normalized);
    out[i] = std::move(g);
  }
  return out;
}

GroundTruthObject perturb(const GroundTruthObject& bundle, const PerturbationSpec& spec,
                          std::uint64_t seed) {
  if (spec.z_rel_noise < 0.0 || spec.z_rel_noise > 1.0 || spec.r_rel_noise < 0.0 ||
      spec.r_rel_noise > 1.0 || spec.nocs_outlier_frac < 0.0 || spec.nocs_outlier_frac > 1.0 ||
      spec.nocs_noise_sigma < 0.0 || spec.mask_erosion_px < 0.0) {
    fail(ErrorCode::InvalidInput, "perturbation parameters out of range");
  }

  GroundTruthObject out = bundle;
  Rng rng = Rng::substream(seed, 0x9E12B);

  if (spec.z_rel_noise > 0.0) {
    out.z_center *= 1.0 + rng.uniform(-spec.z_rel_noise, spec.z_rel_noise);
  }
  if (spec.r_rel_noise > 0.0) {
    out.radius *= 1.0 + rng.uniform(-spec.r_rel_noise, spec.r_rel_noise);
  }

  if (spec.nocs_noise_sigma > 0.0 || spec.nocs_outlier_frac > 0.0) {
    for (int y = 0; y < out.nocs.height; ++y) {
      for (int x = 0; x < out.nocs.width; ++x) {
        if (!out.nocs.is_valid(x, y)) continue;
        if (spec.nocs_outlier_frac > 0.0 && rng.next_double() < spec.nocs_outlier_frac) {
          for (int c = 0; c < 3; ++c) out.nocs.at(x, y, c) = float(rng.next_double());
          continue;
        }
        if (spec.nocs_noise_sigma > 0.0) {
          for (int c = 0; c < 3; ++c) {
            const double v = out.nocs.at(x, y, c) + spec.nocs_noise_sigma * rng.normal();
            out.nocs.at(x, y, c) = float(std::clamp(v, 0.0, 1.0));
          }
        }
      }
    }
  }

  if (spec.mask_erosion_px > 0.0) out.mask = erode(out.mask, spec.mask_erosion_px);
  return out;
}

}  // namespace mp
