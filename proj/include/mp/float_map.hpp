#pragma once

#include <filesystem>

#include "mp/raster.hpp"

namespace mp {

/// Binary raster container: magic "MPF1", little-endian u32 width/height/
/// channels (1 or 3), then width*height*channels little-endian float32,
/// row-major, top row first. Invalid pixels are written as NaN in every
/// channel; anything non-finite on load marks the pixel invalid (value 0).
void save_float_map(const std::filesystem::path& path, const ImageGrid& grid);
ImageGrid load_float_map(const std::filesystem::path& path);

/// Mask carrier: a 1-channel map that is 1.0 on mask pixels, invalid elsewhere.
ImageGrid grid_from_mask(const BoolImage& mask);
BoolImage mask_from_grid(const ImageGrid& grid);

}  // namespace mp
