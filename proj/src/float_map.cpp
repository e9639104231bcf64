#include "mp/float_map.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace mp {

static_assert(std::endian::native == std::endian::little,
              "float map writer assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'M', 'P', 'F', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

}  // namespace

void save_float_map(const std::filesystem::path& path, const ImageGrid& grid) {
  validate_grid(grid);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open for writing: " + path.string());

  out.write(kMagic, 4);
  write_u32(out, std::uint32_t(grid.width));
  write_u32(out, std::uint32_t(grid.height));
  write_u32(out, std::uint32_t(grid.channels));

  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::vector<float> row(std::size_t(grid.width) * grid.channels);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      for (int c = 0; c < grid.channels; ++c) {
        row[std::size_t(x) * grid.channels + c] = grid.is_valid(x, y) ? grid.at(x, y, c) : nan;
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              std::streamsize(row.size() * sizeof(float)));
  }
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

ImageGrid load_float_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open: " + path.string());

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    fail(ErrorCode::ParseError, "bad float map magic: " + path.string());
  }
  const std::uint32_t w = read_u32(in);
  const std::uint32_t h = read_u32(in);
  const std::uint32_t c = read_u32(in);
  if (!in || (c != 1 && c != 3) || w == 0 || h == 0 || w > 1 << 20 || h > 1 << 20) {
    fail(ErrorCode::ParseError, "bad float map header: " + path.string());
  }

  ImageGrid grid = ImageGrid::make(int(w), int(h), int(c));
  std::vector<float> payload(std::size_t(w) * h * c);
  in.read(reinterpret_cast<char*>(payload.data()),
          std::streamsize(payload.size() * sizeof(float)));
  if (!in || std::size_t(in.gcount()) != payload.size() * sizeof(float)) {
    fail(ErrorCode::ParseError, "float map payload truncated: " + path.string());
  }

  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      bool ok = true;
      for (std::uint32_t ch = 0; ch < c; ++ch) {
        ok &= std::isfinite(payload[(std::size_t(y) * w + x) * c + ch]);
      }
      if (!ok) continue;  // invalid pixel stays zeroed
      for (std::uint32_t ch = 0; ch < c; ++ch) {
        grid.at(int(x), int(y), int(ch)) = payload[(std::size_t(y) * w + x) * c + ch];
      }
      grid.set_valid(int(x), int(y), true);
    }
  }
  return grid;
}

ImageGrid grid_from_mask(const BoolImage& mask) {
  ImageGrid grid = ImageGrid::make(mask.width, mask.height, 1);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      grid.at(x, y) = 1.0f;
      grid.set_valid(x, y, true);
    }
  }
  return grid;
}

BoolImage mask_from_grid(const ImageGrid& grid) {
  BoolImage mask = BoolImage::make(grid.width, grid.height, false);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) mask.set(x, y, grid.is_valid(x, y));
  }
  return mask;
}

}  // namespace mp
