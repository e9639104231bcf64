#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mp/types.hpp"

namespace mp {

/// Row-major float raster with 1 or 3 channels and a per-pixel validity mask.
/// Invalid pixels always carry value 0 in every channel.
struct ImageGrid {
  int width = 0, height = 0, channels = 1;
  std::vector<float> data;          // width*height*channels
  std::vector<std::uint8_t> valid;  // width*height

  static ImageGrid make(int width, int height, int channels);

  float at(int x, int y, int c = 0) const {
    return data[(std::size_t(y) * width + x) * channels + c];
  }
  float& at(int x, int y, int c = 0) {
    return data[(std::size_t(y) * width + x) * channels + c];
  }
  bool is_valid(int x, int y) const { return valid[std::size_t(y) * width + x] != 0; }
  void set_valid(int x, int y, bool v) { valid[std::size_t(y) * width + x] = v ? 1 : 0; }

  int valid_count() const;
};

void validate_grid(const ImageGrid& grid);

struct BoolImage {
  int width = 0, height = 0;
  std::vector<std::uint8_t> data;

  static BoolImage make(int width, int height, bool value = false);
  bool at(int x, int y) const { return data[std::size_t(y) * width + x] != 0; }
  void set(int x, int y, bool v) { data[std::size_t(y) * width + x] = v ? 1 : 0; }
  int count() const;
};

/// Binary erosion with a Euclidean disc of the given pixel radius.
BoolImage erode(const BoolImage& mask, double radius_px);

inline constexpr double kNearPlane = 1e-4;  // meters

/// Z-buffer depth render of a camera-frame mesh. Pixel centers are sampled at
/// (x+0.5, y+0.5); depth is perspective-correct (linear in 1/z across the
/// screen triangle); covered pixels hold the nearest surface's camera z.
/// No back-face culling: open meshes contribute whichever surface is nearest.
/// Throws EmptyRender if nothing lands in the frame, InvalidInput if a vertex
/// is at or behind the near plane. Output is independent of `threads`.
ImageGrid render_depth(const TriangleMesh& mesh, const CameraIntrinsics& intrinsics,
                       int threads = 1);

/// Same visibility as render_depth; channels carry perspective-correct
/// interpolation of the per-vertex attribute of the nearest triangle.
ImageGrid render_attributes(const TriangleMesh& mesh,
                            std::span<const Eigen::Vector3d> per_vertex,
                            const CameraIntrinsics& intrinsics, int threads = 1);

/// One rasterization pass producing both maps (identical visibility).
struct DepthAttributeRender {
  ImageGrid depth;       // 1 channel
  ImageGrid attributes;  // 3 channels
};
DepthAttributeRender render_depth_attributes(const TriangleMesh& mesh,
                                             std::span<const Eigen::Vector3d> per_vertex,
                                             const CameraIntrinsics& intrinsics,
                                             int threads = 1);

/// One (pixel, camera point) entry per valid depth pixel, back-projected
/// through the pixel center.
std::vector<std::pair<Eigen::Vector2i, Eigen::Vector3d>> backproject_grid(
    const ImageGrid& depth, const CameraIntrinsics& intrinsics);

}  // namespace mp
