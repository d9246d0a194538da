#include "drape/mesh.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace drape {

double triangleArea(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

void validateMesh(const TriMesh& mesh, bool requireNonDegenerate) {
  const Index n = mesh.vertexCount();
  for (Index f = 0; f < mesh.faceCount(); ++f) {
    const auto face = mesh.faces.row(f);
    for (int k = 0; k < 3; ++k) {
      if (face(k) < 0 || face(k) >= n) {
        std::ostringstream os;
        os << "face " << f << " references vertex " << face(k) << " but mesh has " << n
           << " vertices";
        throw Error(os.str());
      }
    }
    if (face(0) == face(1) || face(1) == face(2) || face(0) == face(2)) {
      throw Error("face " + std::to_string(f) + " repeats a vertex");
    }
    if (requireNonDegenerate) {
      const double area = triangleArea(vertexAt(mesh.vertices, face(0)),
                                       vertexAt(mesh.vertices, face(1)),
                                       vertexAt(mesh.vertices, face(2)));
      if (!(area > 0.0)) {
        throw Error("face " + std::to_string(f) + " has zero area");
      }
    }
  }
}

void TopologyCache::checkCompatible(const TriMesh& mesh) const {
  if (mesh.vertexCount() != vertexCount || mesh.faceCount() != faceCount) {
    std::ostringstream os;
    os << "topology mismatch: cache built for " << vertexCount << " vertices / " << faceCount
       << " faces, mesh has " << mesh.vertexCount() << " / " << mesh.faceCount();
    throw Error(os.str());
  }
}

TopologyCache buildTopology(const TriMesh& mesh) {
  validateMesh(mesh);
  TopologyCache topo;
  topo.vertexCount = mesh.vertexCount();
  topo.faceCount = mesh.faceCount();

  std::map<Edge, std::vector<Index>> edgeFaces;
  for (Index f = 0; f < mesh.faceCount(); ++f) {
    for (int k = 0; k < 3; ++k) {
      Index a = mesh.faces(f, k);
      Index b = mesh.faces(f, (k + 1) % 3);
      if (a > b) std::swap(a, b);
      edgeFaces[Edge{a, b}].push_back(f);
    }
  }

  topo.edges.reserve(edgeFaces.size());
  topo.faceAdjacency.assign(static_cast<std::size_t>(mesh.faceCount()), {});
  for (const auto& [edge, faces] : edgeFaces) {
    if (faces.size() > 2) {
      std::ostringstream os;
      os << "non-manifold edge (" << edge.a << ", " << edge.b << ") shared by " << faces.size()
         << " faces";
      throw Error(os.str());
    }
    const auto edgeIndex = static_cast<Index>(topo.edges.size());
    topo.edges.push_back(edge);
    topo.restEdgeLengths.push_back(
        (vertexAt(mesh.vertices, edge.a) - vertexAt(mesh.vertices, edge.b)).norm());
    if (faces.size() == 2) {
      topo.dihedralPairs.push_back(DihedralPair{faces[0], faces[1], edgeIndex});
      topo.faceAdjacency[faces[0]].push_back(faces[1]);
      topo.faceAdjacency[faces[1]].push_back(faces[0]);
    }
  }
  for (auto& adj : topo.faceAdjacency) std::sort(adj.begin(), adj.end());
  return topo;
}

std::vector<Vec3> faceNormals(const TriMesh& mesh) {
  std::vector<Vec3> normals(static_cast<std::size_t>(mesh.faceCount()));
  for (Index f = 0; f < mesh.faceCount(); ++f) {
    const Vec3 a = vertexAt(mesh.vertices, mesh.faces(f, 0));
    const Vec3 b = vertexAt(mesh.vertices, mesh.faces(f, 1));
    const Vec3 c = vertexAt(mesh.vertices, mesh.faces(f, 2));
    const Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    if (!(len > 0.0)) throw Error("zero-area face " + std::to_string(f));
    normals[f] = n / len;
  }
  return normals;
}

VertexNormals vertexNormals(const TriMesh& mesh) {
  VertexNormals out;
  out.normals.assign(static_cast<std::size_t>(mesh.vertexCount()), Vec3::Zero());
  std::vector<bool> touched(out.normals.size(), false);
  for (Index f = 0; f < mesh.faceCount(); ++f) {
    const Vec3 a = vertexAt(mesh.vertices, mesh.faces(f, 0));
    const Vec3 b = vertexAt(mesh.vertices, mesh.faces(f, 1));
    const Vec3 c = vertexAt(mesh.vertices, mesh.faces(f, 2));
    // |cross| is twice the area, so summing raw cross products area-weights.
    const Vec3 n = (b - a).cross(c - a);
    for (int k = 0; k < 3; ++k) {
      out.normals[mesh.faces(f, k)] += n;
      touched[mesh.faces(f, k)] = true;
    }
  }
  for (std::size_t v = 0; v < out.normals.size(); ++v) {
    const double len = out.normals[v].norm();
    if (!touched[v] || !(len > 0.0)) {
      out.normals[v].setZero();
      out.isolated.push_back(static_cast<Index>(v));
    } else {
      out.normals[v] /= len;
    }
  }
  return out;
}

void MeshSequence::push_back(const TriMesh& mesh) {
  if (frames.empty()) {
    faces = mesh.faces;
  } else if (mesh.faces.rows() != faces.rows() || mesh.faces != faces ||
             mesh.vertices.rows() != frames.front().rows()) {
    throw Error("mesh sequence frame " + std::to_string(frames.size()) +
                " does not share the sequence topology");
  }
  frames.push_back(mesh.vertices);
}

void MeshSequence::validate() const {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].rows() != frames.front().rows()) {
      throw Error("mesh sequence frame " + std::to_string(i) + " has a different vertex count");
    }
  }
}

}  // namespace drape
