#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "drape/mesh.hpp"

namespace drape::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    const auto base = std::filesystem::temp_directory_path();
    for (;;) {
      path_ = base / ("drape_test_" + std::to_string(rd()));
      if (std::filesystem::create_directory(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Points randomPoints(Index n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  Points p(n, 3);
  for (Index i = 0; i < n; ++i) {
    for (int d = 0; d < 3; ++d) p(i, d) = u(rng);
  }
  return p;
}

inline TriMesh singleTriangle() {
  TriMesh m;
  m.vertices.resize(3, 3);
  m.vertices << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  m.faces.resize(1, 3);
  m.faces << 0, 1, 2;
  return m;
}

/// Unit square in z = 0 split along (1, 2).
inline TriMesh twoTriangles() {
  TriMesh m;
  m.vertices.resize(4, 3);
  m.vertices << 0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 0;
  m.faces.resize(2, 3);
  m.faces << 0, 1, 2, 2, 1, 3;
  return m;
}

/// Axis-aligned unit cube [0,1]^3, outward winding.
inline TriMesh cube() {
  TriMesh m;
  m.vertices.resize(8, 3);
  for (int i = 0; i < 8; ++i) m.vertices.row(i) << (i & 1), (i >> 1) & 1, (i >> 2) & 1;
  m.faces.resize(12, 3);
  m.faces << 0, 2, 1, 1, 2, 3,  // z = 0
      4, 5, 6, 5, 7, 6,          // z = 1
      0, 1, 4, 1, 5, 4,          // y = 0
      2, 6, 3, 3, 6, 7,          // y = 1
      0, 4, 2, 2, 4, 6,          // x = 0
      1, 3, 5, 3, 7, 5;          // x = 1
  return m;
}

}  // namespace drape::test
