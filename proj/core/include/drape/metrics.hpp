#pragma once

#include <cstdint>

#include "drape/mesh.hpp"

namespace drape {

inline constexpr int kDefaultChamferSamples = 10000;
inline constexpr std::uint64_t kDefaultSampleSeed = 0x5eed;

/// Area-weighted uniform samples on the surface. Deterministic in `seed`.
Points sampleSurface(const TriMesh& mesh, int count, std::uint64_t seed);

/// Symmetric mean nearest-neighbor distance between two point sets, in the
/// input units. `bruteForce` selects the O(n*m) reference scan.
double chamferPoints(const Points& a, const Points& b, bool bruteForce = false);

/// Chamfer distance in centimeters between surface samples of `a` and `b`.
/// Both meshes are sampled with the same seed, so identical meshes give 0.
double chamferDistance(const TriMesh& a, const TriMesh& b, int samples = kDefaultChamferSamples,
                       std::uint64_t seed = kDefaultSampleSeed);

/// RMS of per-vertex displacement between adjacent frames, in centimeters.
double ccv(const MeshSequence& seq);

/// Per adjacent pair (t-1, t): RMS vertex displacement in centimeters.
std::vector<double> ccvPerFrame(const MeshSequence& seq);

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  [[nodiscard]] Points apply(const Points& p) const;
  [[nodiscard]] TriMesh apply(const TriMesh& m) const { return TriMesh{apply(m.vertices), m.faces}; }
};

/// Least-squares rotation + translation taking `src[i]` onto `dst[i]`
/// (orthogonal Procrustes). Throws on fewer than 3 points or collinear input.
RigidTransform procrustes(const Points& src, const Points& dst);

/// Rigid alignment of `src` onto `dst`. When `dst` has one point per source
/// vertex the correspondence is taken by index and solved in closed form;
/// otherwise ICP over surface samples of `src` is run from a centroid start.
RigidTransform rigidAlign(const TriMesh& src, const Points& dst, std::uint64_t seed = kDefaultSampleSeed);

}  // namespace drape
