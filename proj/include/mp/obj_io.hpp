#pragma once

#include <filesystem>

#include "mp/types.hpp"

namespace mp {

/// Wavefront-style reader: `v x y z` and `f i j k ...` records (1-based,
/// `i/t/n` suffixes ignored, polygons fan-triangulated, other record types
/// skipped). Throws ParseError with the offending line number, or
/// IndexOutOfRange for face indices past the vertex count.
TriangleMesh load_obj(const std::filesystem::path& path,
                      MeshFrame frame = MeshFrame::Normalized);

/// Plain `v`/`f` writer with round-trip-exact vertex formatting.
void save_obj(const std::filesystem::path& path, const TriangleMesh& mesh);

}  // namespace mp
