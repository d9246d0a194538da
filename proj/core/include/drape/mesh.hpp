#pragma once

#include <string>
#include <utility>
#include <vector>

#include "drape/common.hpp"

namespace drape {

/// Triangle mesh: vertex positions in meters plus index triples.
struct TriMesh {
  Points vertices;
  Faces faces;

  [[nodiscard]] Index vertexCount() const { return static_cast<Index>(vertices.rows()); }
  [[nodiscard]] Index faceCount() const { return static_cast<Index>(faces.rows()); }
  [[nodiscard]] bool empty() const { return vertices.rows() == 0 || faces.rows() == 0; }
};

/// Checks index range and repeated corners. When `requireNonDegenerate` is
/// set, zero-area faces are rejected too (template meshes).
void validateMesh(const TriMesh& mesh, bool requireNonDegenerate = false);

struct Edge {
  Index a = 0;  // a < b
  Index b = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Two faces sharing an interior edge.
struct DihedralPair {
  Index faceA = 0;
  Index faceB = 0;
  Index edge = 0;
};

/// Connectivity derived once from a template mesh and reused for every
/// posed copy of it.
struct TopologyCache {
  std::vector<Edge> edges;
  std::vector<double> restEdgeLengths;
  std::vector<DihedralPair> dihedralPairs;
  std::vector<std::vector<Index>> faceAdjacency;
  Index vertexCount = 0;
  Index faceCount = 0;

  /// Throws if `mesh` does not have the shape this cache was built from.
  void checkCompatible(const TriMesh& mesh) const;
};

/// Edges sorted by (a, b). Throws on an edge shared by more than two faces.
TopologyCache buildTopology(const TriMesh& mesh);

/// Unit face normals by the right-hand rule. Throws on a zero-area face.
std::vector<Vec3> faceNormals(const TriMesh& mesh);

struct VertexNormals {
  std::vector<Vec3> normals;
  /// Vertices not referenced by any face; their normal is the zero vector.
  std::vector<Index> isolated;
};

/// Area-weighted average of incident face normals.
VertexNormals vertexNormals(const TriMesh& mesh);

/// Frames of one surface over time; all frames share the face list.
struct MeshSequence {
  Faces faces;
  std::vector<Points> frames;

  [[nodiscard]] std::size_t size() const { return frames.size(); }
  [[nodiscard]] TriMesh frame(std::size_t i) const { return TriMesh{frames.at(i), faces}; }
  void push_back(const TriMesh& mesh);
  void validate() const;
};

double triangleArea(const Vec3& a, const Vec3& b, const Vec3& c);

inline Vec3 vertexAt(const Points& p, Index i) { return p.row(i).transpose(); }

}  // namespace drape
