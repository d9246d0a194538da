#pragma once

#include <filesystem>

#include "drape/mesh.hpp"

namespace drape {

/// Reads `v` and `f` records; polygons are fan-triangulated and
/// texture/normal indices (`f 1/2/3 ...`) are ignored. Negative (relative)
/// indices are resolved against the vertices read so far.
TriMesh loadObj(const std::filesystem::path& path);

/// Writes 1-based ASCII OBJ; coordinates use 17 significant digits so a
/// save/load cycle reproduces every double exactly.
void saveObj(const TriMesh& mesh, const std::filesystem::path& path);

}  // namespace drape
