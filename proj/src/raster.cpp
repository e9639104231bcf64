#include "mp/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mp/lift.hpp"
#include "mp/parallel.hpp"

namespace mp {

ImageGrid ImageGrid::make(int width, int height, int channels) {
  ImageGrid g;
  g.width = width;
  g.height = height;
  g.channels = channels;
  g.data.assign(std::size_t(width) * height * channels, 0.0f);
  g.valid.assign(std::size_t(width) * height, 0);
  return g;
}

int ImageGrid::valid_count() const {
  int n = 0;
  for (auto v : valid) n += v != 0;
  return n;
}

void validate_grid(const ImageGrid& grid) {
  if (grid.channels != 1 && grid.channels != 3) {
    fail(ErrorCode::InvalidInput, "grid must have 1 or 3 channels");
  }
  if (grid.data.size() != std::size_t(grid.width) * grid.height * grid.channels ||
      grid.valid.size() != std::size_t(grid.width) * grid.height) {
    fail(ErrorCode::InvalidInput, "grid buffer sizes do not match dimensions");
  }
}

BoolImage BoolImage::make(int width, int height, bool value) {
  BoolImage m;
  m.width = width;
  m.height = height;
  m.data.assign(std::size_t(width) * height, value ? 1 : 0);
  return m;
}

int BoolImage::count() const {
  int n = 0;
  for (auto v : data) n += v != 0;
  return n;
}

BoolImage erode(const BoolImage& mask, double radius_px) {
  if (radius_px <= 0.0) return mask;
  const int r = int(std::floor(radius_px));
  std::vector<std::pair<int, int>> offsets;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      if (double(dx) * dx + double(dy) * dy <= radius_px * radius_px) offsets.emplace_back(dx, dy);

  BoolImage out = BoolImage::make(mask.width, mask.height, false);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      bool keep = true;
      for (const auto& [dx, dy] : offsets) {
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height || !mask.at(nx, ny)) {
          keep = false;
          break;
        }
      }
      out.set(x, y, keep);
    }
  }
  return out;
}

namespace {

struct ScreenTriangle {
  double x[3], y[3], iz[3];
  int vid[3];
  double area2;  // positive after winding normalization
  int min_x, max_x, min_y, max_y;
};

// Shared-edge ownership: a pixel center exactly on an edge belongs to the
// triangle whose edge is a top edge (horizontal, pointing +x) or a left edge
// (pointing -y), so adjoining triangles never both claim it.
inline bool edge_is_top_left(double ax, double ay, double bx, double by) {
  if (ay == by) return bx > ax;
  return by < ay;
}

std::vector<ScreenTriangle> project_triangles(const TriangleMesh& mesh,
                                              const CameraIntrinsics& k) {
  for (const auto& v : mesh.vertices) {
    if (!(v.z() > kNearPlane)) {
      fail(ErrorCode::InvalidInput, "mesh vertex at or behind the near plane");
    }
  }
  std::vector<double> sx(mesh.vertices.size()), sy(mesh.vertices.size()),
      iz(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const auto& v = mesh.vertices[i];
    sx[i] = k.fx * v.x() / v.z() + k.cx;
    sy[i] = k.fy * v.y() / v.z() + k.cy;
    iz[i] = 1.0 / v.z();
  }

  std::vector<ScreenTriangle> out;
  out.reserve(mesh.faces.size());
  for (const auto& f : mesh.faces) {
    ScreenTriangle t;
    int order[3] = {f[0], f[1], f[2]};
    double area2 = (sx[order[1]] - sx[order[0]]) * (sy[order[2]] - sy[order[0]]) -
                   (sy[order[1]] - sy[order[0]]) * (sx[order[2]] - sx[order[0]]);
    if (area2 == 0.0) continue;  // degenerate in projection
    if (area2 < 0.0) {
      std::swap(order[1], order[2]);
      area2 = -area2;
    }
    for (int i = 0; i < 3; ++i) {
      t.x[i] = sx[order[i]];
      t.y[i] = sy[order[i]];
      t.iz[i] = iz[order[i]];
      t.vid[i] = order[i];
    }
    t.area2 = area2;
    const double lo_x = std::min({t.x[0], t.x[1], t.x[2]});
    const double hi_x = std::max({t.x[0], t.x[1], t.x[2]});
    const double lo_y = std::min({t.y[0], t.y[1], t.y[2]});
    const double hi_y = std::max({t.y[0], t.y[1], t.y[2]});
    t.min_x = std::max(0, int(std::ceil(lo_x - 0.5)));
    t.max_x = std::min(k.width - 1, int(std::floor(hi_x - 0.5)));
    t.min_y = std::max(0, int(std::ceil(lo_y - 0.5)));
    t.max_y = std::min(k.height - 1, int(std::floor(hi_y - 0.5)));
    if (t.min_x > t.max_x || t.min_y > t.max_y) continue;
    out.push_back(t);
  }
  return out;
}

// Rasterizes rows [row_begin, row_end). Each pixel's result depends only on
// the full triangle list and its own center, so any row partition yields the
// same buffers.
void raster_rows(const std::vector<ScreenTriangle>& tris,
                 const std::vector<Eigen::Vector3d>* attrs,
                 const std::vector<std::array<int, 3>>& faces, int width,
                 std::vector<double>& zbuf, std::vector<double>* abuf, int row_begin,
                 int row_end) {
  (void)faces;
  for (const auto& t : tris) {
    const int y0 = std::max(t.min_y, row_begin);
    const int y1 = std::min(t.max_y, row_end - 1);
    for (int py = y0; py <= y1; ++py) {
      const double cy = py + 0.5;
      for (int px = t.min_x; px <= t.max_x; ++px) {
        const double cx = px + 0.5;
        bool inside = true;
        double e[3];
        for (int i = 0; i < 3 && inside; ++i) {
          const int j = (i + 1) % 3;
          e[i] = (t.x[j] - t.x[i]) * (cy - t.y[i]) - (t.y[j] - t.y[i]) * (cx - t.x[i]);
          if (e[i] < 0.0) inside = false;
          if (e[i] == 0.0 && !edge_is_top_left(t.x[i], t.y[i], t.x[j], t.y[j])) inside = false;
        }
        if (!inside) continue;

        // Barycentric weight of vertex i is the edge function opposite it.
        const double w0 = e[1] / t.area2;
        const double w1 = e[2] / t.area2;
        const double w2 = e[0] / t.area2;
        const double inv_z = w0 * t.iz[0] + w1 * t.iz[1] + w2 * t.iz[2];
        if (!(inv_z > 0.0)) continue;
        const double depth = 1.0 / inv_z;

        const std::size_t idx = std::size_t(py) * width + px;
        if (depth < zbuf[idx]) {
          zbuf[idx] = depth;
          if (abuf) {
            const Eigen::Vector3d a =
                (w0 * t.iz[0] * (*attrs)[t.vid[0]] + w1 * t.iz[1] * (*attrs)[t.vid[1]] +
                 w2 * t.iz[2] * (*attrs)[t.vid[2]]) *
                depth;
            (*abuf)[idx * 3 + 0] = a.x();
            (*abuf)[idx * 3 + 1] = a.y();
            (*abuf)[idx * 3 + 2] = a.z();
          }
        }
      }
    }
  }
}

DepthAttributeRender rasterize(const TriangleMesh& mesh,
                               const std::vector<Eigen::Vector3d>* attrs,
                               const CameraIntrinsics& k, int threads) {
  validate_intrinsics(k);
  validate_mesh(mesh);
  if (attrs && attrs->size() != mesh.vertices.size()) {
    fail(ErrorCode::InvalidInput, "per-vertex attribute count != vertex count");
  }

  const auto tris = project_triangles(mesh, k);
  const std::size_t n = std::size_t(k.width) * k.height;
  std::vector<double> zbuf(n, std::numeric_limits<double>::infinity());
  std::vector<double> abuf;
  if (attrs) abuf.assign(n * 3, 0.0);

  const int bands = std::max(1, std::min(threads, k.height));
  if (bands == 1) {
    raster_rows(tris, attrs, mesh.faces, k.width, zbuf, attrs ? &abuf : nullptr, 0, k.height);
  } else {
    const int rows_per_band = (k.height + bands - 1) / bands;
    parallel_for(bands, bands, [&](int b) {
      const int r0 = b * rows_per_band;
      const int r1 = std::min(k.height, r0 + rows_per_band);
      if (r0 < r1) {
        raster_rows(tris, attrs, mesh.faces, k.width, zbuf, attrs ? &abuf : nullptr, r0, r1);
      }
    });
  }

  DepthAttributeRender out;
  out.depth = ImageGrid::make(k.width, k.height, 1);
  if (attrs) out.attributes = ImageGrid::make(k.width, k.height, 3);
  bool any = false;
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const std::size_t idx = std::size_t(y) * k.width + x;
      if (!std::isfinite(zbuf[idx])) continue;
      any = true;
      out.depth.at(x, y) = float(zbuf[idx]);
      out.depth.set_valid(x, y, true);
      if (attrs) {
        for (int c = 0; c < 3; ++c) out.attributes.at(x, y, c) = float(abuf[idx * 3 + c]);
        out.attributes.set_valid(x, y, true);
      }
    }
  }
  if (!any) fail(ErrorCode::EmptyRender, "no pixel covered by the mesh");
  return out;
}

}  // namespace

ImageGrid render_depth(const TriangleMesh& mesh, const CameraIntrinsics& intrinsics,
                       int threads) {
  return rasterize(mesh, nullptr, intrinsics, threads).depth;
}

ImageGrid render_attributes(const TriangleMesh& mesh,
                            std::span<const Eigen::Vector3d> per_vertex,
                            const CameraIntrinsics& intrinsics, int threads) {
  const std::vector<Eigen::Vector3d> attrs(per_vertex.begin(), per_vertex.end());
  return rasterize(mesh, &attrs, intrinsics, threads).attributes;
}

DepthAttributeRender render_depth_attributes(const TriangleMesh& mesh,
                                             std::span<const Eigen::Vector3d> per_vertex,
                                             const CameraIntrinsics& intrinsics,
                                             int threads) {
  const std::vector<Eigen::Vector3d> attrs(per_vertex.begin(), per_vertex.end());
  return rasterize(mesh, &attrs, intrinsics, threads);
}

std::vector<std::pair<Eigen::Vector2i, Eigen::Vector3d>> backproject_grid(
    const ImageGrid& depth, const CameraIntrinsics& intrinsics) {
  validate_grid(depth);
  if (depth.channels != 1) fail(ErrorCode::InvalidInput, "depth grid must have 1 channel");
  std::vector<std::pair<Eigen::Vector2i, Eigen::Vector3d>> out;
  out.reserve(std::size_t(depth.valid_count()));
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      if (!depth.is_valid(x, y)) continue;
      out.emplace_back(Eigen::Vector2i(x, y),
                       backproject_pixel(x + 0.5, y + 0.5, depth.at(x, y), intrinsics));
    }
  }
  return out;
}

}  // namespace mp
