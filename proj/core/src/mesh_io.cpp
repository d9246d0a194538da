#include "drape/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace drape {

namespace {

[[noreturn]] void parseError(const std::filesystem::path& path, std::size_t line,
                             const std::string& what) {
  std::ostringstream os;
  os << path.string() << ":" << line << ": " << what;
  throw Error(os.str());
}

}  // namespace

TriMesh loadObj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open OBJ file " + path.string());

  std::vector<double> coords;
  std::vector<Index> tris;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) parseError(path, lineNo, "malformed vertex record");
      coords.insert(coords.end(), {x, y, z});
    } else if (tag == "f") {
      std::vector<Index> poly;
      std::string tok;
      const auto vertexCount = static_cast<long>(coords.size() / 3);
      while (ls >> tok) {
        const auto slash = tok.find('/');
        const std::string head = tok.substr(0, slash);
        long idx = 0;
        try {
          std::size_t used = 0;
          idx = std::stol(head, &used);
          if (used != head.size()) throw std::invalid_argument(head);
        } catch (const std::exception&) {
          parseError(path, lineNo, "malformed face index '" + tok + "'");
        }
        if (idx < 0) idx = vertexCount + idx + 1;
        if (idx < 1 || idx > vertexCount) {
          parseError(path, lineNo, "face index " + head + " out of range");
        }
        poly.push_back(static_cast<Index>(idx - 1));
      }
      if (poly.size() < 3) parseError(path, lineNo, "face with fewer than 3 vertices");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        tris.insert(tris.end(), {poly[0], poly[k], poly[k + 1]});
      }
    }
    // vt, vn, g, o, s, usemtl, mtllib: not needed for geometry.
  }

  TriMesh mesh;
  mesh.vertices = Eigen::Map<const Points>(coords.data(), static_cast<Eigen::Index>(coords.size() / 3), 3);
  mesh.faces = Eigen::Map<const Faces>(tris.data(), static_cast<Eigen::Index>(tris.size() / 3), 3);
  validateMesh(mesh);
  return mesh;
}

void saveObj(const TriMesh& mesh, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (f == nullptr) throw Error("cannot write OBJ file " + path.string());
  for (Index i = 0; i < mesh.vertexCount(); ++i) {
    std::fprintf(f, "v %.17g %.17g %.17g\n", mesh.vertices(i, 0), mesh.vertices(i, 1),
                 mesh.vertices(i, 2));
  }
  for (Index i = 0; i < mesh.faceCount(); ++i) {
    std::fprintf(f, "f %d %d %d\n", mesh.faces(i, 0) + 1, mesh.faces(i, 1) + 1,
                 mesh.faces(i, 2) + 1);
  }
  if (std::fclose(f) != 0) throw Error("failed writing OBJ file " + path.string());
}

}  // namespace drape
