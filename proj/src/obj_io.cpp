#include "mp/obj_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace mp {

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& path, int line, const char* what) {
  fail(ErrorCode::ParseError,
       path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

TriangleMesh load_obj(const std::filesystem::path& path, MeshFrame frame) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open: " + path.string());

  TriangleMesh mesh;
  mesh.frame = frame;
  struct PendingFace {
    std::array<int, 3> idx;
    int line;
  };
  std::vector<PendingFace> pending;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag.empty() || tag[0] == '#') continue;

    if (tag == "v") {
      double x, y, z;
      if (!(ss >> x >> y >> z)) parse_fail(path, line_no, "malformed vertex record");
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string token;
      while (ss >> token) {
        // Only the leading vertex index matters; texture/normal refs follow '/'.
        const std::size_t slash = token.find('/');
        const std::string head = slash == std::string::npos ? token : token.substr(0, slash);
        int value = 0;
        const auto [ptr, ec] =
            std::from_chars(head.data(), head.data() + head.size(), value);
        if (ec != std::errc() || ptr != head.data() + head.size() || value == 0) {
          parse_fail(path, line_no, "malformed face index");
        }
        poly.push_back(value);
      }
      if (poly.size() < 3) parse_fail(path, line_no, "face with fewer than 3 vertices");
      for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        pending.push_back({{poly[0], poly[i], poly[i + 1]}, line_no});
      }
    }
    // Every other record type (vn, vt, usemtl, o, g, s, ...) is ignored.
  }

  const int n = int(mesh.vertices.size());
  for (const auto& f : pending) {
    std::array<int, 3> resolved{};
    for (int k = 0; k < 3; ++k) {
      int idx = f.idx[k];
      if (idx < 0) idx = n + idx + 1;  // OBJ negative indices count from the end
      if (idx < 1 || idx > n) {
        fail(ErrorCode::IndexOutOfRange, path.string() + ":" + std::to_string(f.line) +
                                             ": face index " + std::to_string(f.idx[k]) +
                                             " out of range");
      }
      resolved[k] = idx - 1;
    }
    mesh.faces.push_back(resolved);
  }
  validate_mesh(mesh);
  return mesh;
}

void save_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  validate_mesh(mesh);
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open for writing: " + path.string());

  char buf[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& f : mesh.faces) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace mp
