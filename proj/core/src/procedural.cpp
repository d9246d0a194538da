#include "drape/procedural.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace drape::procedural {

namespace {

enum class Part { Torso, Head, Arm, Leg, Foot };

/// Breakpoint along a tube's axis: from `start` onwards the bone is driven
/// by `joint`.
struct Region {
  double start;
  Index joint;
};

struct RingSpec {
  double s;        // position along the tube axis
  double radiusU;  // along the first cross-section axis
  double radiusW;  // along the second cross-section axis
};

struct TubeBuild {
  Vec3 origin;  // axis point at s = 0
  Vec3 axis;    // unit direction of increasing s
  Vec3 u;
  Vec3 w;
  Index segments;
  std::vector<RingSpec> rings;
  std::vector<Region> regions;
  Part part;
  double side = 0.0;  // +1 left, -1 right, 0 center
};

constexpr double kBlendHalfWidth = 0.03;

std::vector<std::pair<Index, double>> ringWeights(const std::vector<Region>& regions, double s) {
  std::size_t r = 0;
  while (r + 1 < regions.size() && s >= regions[r + 1].start) ++r;
  // Blend across the nearest region boundary.
  auto blend = [&](std::size_t lower, std::size_t upper) -> std::vector<std::pair<Index, double>> {
    const double t = std::clamp(0.5 + (s - regions[upper].start) / (2.0 * kBlendHalfWidth), 0.0, 1.0);
    if (t <= 0.0) return {{regions[lower].joint, 1.0}};
    if (t >= 1.0) return {{regions[upper].joint, 1.0}};
    return {{regions[lower].joint, 1.0 - t}, {regions[upper].joint, t}};
  };
  if (r + 1 < regions.size() && regions[r + 1].start - s < kBlendHalfWidth) return blend(r, r + 1);
  if (r > 0 && s - regions[r].start < kBlendHalfWidth) return blend(r - 1, r);
  return {{regions[r].joint, 1.0}};
}

struct BodyBuilder {
  std::vector<Vec3> vertices;
  std::vector<std::array<Index, 3>> faces;
  std::vector<std::vector<std::pair<Index, double>>> weights;
  std::vector<Part> parts;
  std::vector<double> sides;
  /// First vertex index of each ring, keyed by (tube, ring).
  std::vector<std::vector<Index>> ringStarts;
  std::vector<Index> ringSegments;

  void addTube(const TubeBuild& tube) {
    std::vector<Index> starts;
    for (const RingSpec& ring : tube.rings) {
      starts.push_back(static_cast<Index>(vertices.size()));
      const Vec3 center = tube.origin + ring.s * tube.axis;
      const auto w = ringWeights(tube.regions, ring.s);
      for (Index k = 0; k < tube.segments; ++k) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(tube.segments);
        vertices.push_back(center + ring.radiusU * std::cos(phi) * tube.u + ring.radiusW * std::sin(phi) * tube.w);
        weights.push_back(w);
        parts.push_back(tube.part);
        sides.push_back(tube.side);
      }
    }
    // With u x w along the axis, (ring r, k) -> (r, k+1) -> (r+1, k) winds
    // with normals pointing away from the axis.
    const bool flip = tube.u.cross(tube.w).dot(tube.axis) < 0.0;
    for (std::size_t r = 0; r + 1 < starts.size(); ++r) {
      for (Index k = 0; k < tube.segments; ++k) {
        const Index k1 = (k + 1) % tube.segments;
        const Index a = starts[r] + k;
        const Index b = starts[r] + k1;
        const Index c = starts[r + 1] + k;
        const Index d = starts[r + 1] + k1;
        if (!flip) {
          faces.push_back({a, b, c});
          faces.push_back({b, d, c});
        } else {
          faces.push_back({a, c, b});
          faces.push_back({b, c, d});
        }
      }
    }
    ringStarts.push_back(starts);
    ringSegments.push_back(tube.segments);
  }
};

std::vector<RingSpec> rings(std::initializer_list<std::array<double, 3>> list) {
  std::vector<RingSpec> out;
  for (const auto& r : list) out.push_back(RingSpec{r[0], r[1], r[2]});
  return out;
}

float roundToFloat(double v) { return static_cast<float>(v); }

}  // namespace

TriMesh verticalTube(const TubeSpec& spec) {
  if (spec.rings < 2 || spec.segments < 3) throw Error("tube needs >= 2 rings and >= 3 segments");
  TriMesh mesh;
  mesh.vertices.resize(spec.rings * spec.segments, 3);
  for (Index r = 0; r < spec.rings; ++r) {
    const double t = static_cast<double>(r) / static_cast<double>(spec.rings - 1);
    const double y = spec.yTop + t * (spec.yBottom - spec.yTop);
    const double rx = spec.radiusXTop + t * (spec.radiusXBottom - spec.radiusXTop);
    const double rz = spec.radiusZTop + t * (spec.radiusZBottom - spec.radiusZTop);
    for (Index k = 0; k < spec.segments; ++k) {
      const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(spec.segments);
      mesh.vertices.row(r * spec.segments + k) << rx * std::cos(phi), y, rz * std::sin(phi);
    }
  }
  mesh.faces.resize(2 * (spec.rings - 1) * spec.segments, 3);
  Index f = 0;
  for (Index r = 0; r + 1 < spec.rings; ++r) {
    for (Index k = 0; k < spec.segments; ++k) {
      const Index k1 = (k + 1) % spec.segments;
      const Index a = r * spec.segments + k;
      const Index b = r * spec.segments + k1;
      const Index c = (r + 1) * spec.segments + k;
      const Index d = (r + 1) * spec.segments + k1;
      // Rings run top to bottom (axis -y); x cross z = -y, so this winding
      // yields outward normals.
      mesh.faces.row(f++) << a, b, c;
      mesh.faces.row(f++) << b, d, c;
    }
  }
  return mesh;
}

TriMesh shirtTemplate() { return verticalTube(TubeSpec{}); }

TriMesh skirtTemplate() {
  TubeSpec spec;
  spec.rings = 9;
  spec.segments = 20;
  spec.yTop = -0.02;
  spec.yBottom = -0.40;
  spec.radiusXBottom = 0.26;
  spec.radiusZBottom = 0.20;
  return verticalTube(spec);
}

BodyModel syntheticBody() {
  BodyBuilder b;
  const Vec3 ex = Vec3::UnitX();
  const Vec3 ey = Vec3::UnitY();
  const Vec3 ez = Vec3::UnitZ();

  // Torso and head along +y from the pelvis.
  b.addTube(TubeBuild{Vec3::Zero(), ey, ez, ex, 12,
                      rings({{-0.14, 0.10, 0.15}, {-0.07, 0.10, 0.15}, {0.0, 0.10, 0.15}, {0.05, 0.10, 0.15},
                             {0.10, 0.10, 0.15}, {0.16, 0.10, 0.15}, {0.22, 0.10, 0.15}, {0.28, 0.10, 0.15},
                             {0.34, 0.10, 0.15}, {0.42, 0.10, 0.15}, {0.50, 0.06, 0.06}, {0.55, 0.08, 0.07},
                             {0.60, 0.09, 0.085}, {0.68, 0.09, 0.085}, {0.76, 0.045, 0.04}}),
                      {{-1e9, 0}, {0.10, 3}, {0.22, 6}, {0.34, 9}, {0.50, 12}, {0.60, 15}},
                      Part::Torso, 0.0});
  // Arms along +-x at shoulder height.
  for (const double side : {1.0, -1.0}) {
    const bool left = side > 0.0;
    b.addTube(TubeBuild{Vec3(0.0, 0.44, 0.0), side * ex, ey, side * ez, 8,
                        rings({{0.12, 0.05, 0.05}, {0.17, 0.05, 0.05}, {0.24, 0.045, 0.045},
                               {0.30, 0.045, 0.045}, {0.36, 0.042, 0.042}, {0.42, 0.04, 0.04},
                               {0.48, 0.038, 0.038}, {0.55, 0.035, 0.035}, {0.61, 0.033, 0.033},
                               {0.67, 0.03, 0.03}, {0.75, 0.028, 0.028}}),
                        {{-1e9, static_cast<Index>(left ? 13 : 14)},
                         {0.17, static_cast<Index>(left ? 16 : 17)},
                         {0.42, static_cast<Index>(left ? 18 : 19)},
                         {0.67, static_cast<Index>(left ? 20 : 21)},
                         {0.75, static_cast<Index>(left ? 22 : 23)}},
                        Part::Arm, side});
  }
  // Legs along -y from the hips, feet along +z.
  for (const double side : {1.0, -1.0}) {
    const bool left = side > 0.0;
    b.addTube(TubeBuild{Vec3(0.09 * side, 0.0, 0.0), -ey, ex, ez, 10,
                        rings({{0.05, 0.075, 0.075}, {0.08, 0.075, 0.075}, {0.16, 0.07, 0.07},
                               {0.24, 0.065, 0.065}, {0.32, 0.06, 0.06}, {0.40, 0.055, 0.055},
                               {0.48, 0.05, 0.05}, {0.58, 0.048, 0.048}, {0.68, 0.045, 0.045},
                               {0.78, 0.042, 0.042}, {0.88, 0.04, 0.04}}),
                        {{-1e9, 0},
                         {0.08, static_cast<Index>(left ? 1 : 2)},
                         {0.48, static_cast<Index>(left ? 4 : 5)},
                         {0.88, static_cast<Index>(left ? 7 : 8)}},
                        Part::Leg, side});
    b.addTube(TubeBuild{Vec3(0.09 * side, -0.93, 0.0), ez, ex, ey, 6,
                        rings({{-0.04, 0.04, 0.03}, {0.03, 0.04, 0.03}, {0.10, 0.038, 0.028}, {0.16, 0.03, 0.02}}),
                        {{-1e9, static_cast<Index>(left ? 7 : 8)}, {0.10, static_cast<Index>(left ? 10 : 11)}},
                        Part::Foot, side});
  }

  BodyModel model;
  const auto v = static_cast<Index>(b.vertices.size());
  model.templateMesh.vertices.resize(v, 3);
  for (Index i = 0; i < v; ++i) {
    for (int d = 0; d < 3; ++d) model.templateMesh.vertices(i, d) = roundToFloat(b.vertices[i](d));
  }
  model.templateMesh.faces.resize(static_cast<Index>(b.faces.size()), 3);
  for (std::size_t f = 0; f < b.faces.size(); ++f) {
    model.templateMesh.faces.row(static_cast<Index>(f)) << b.faces[f][0], b.faces[f][1], b.faces[f][2];
  }
  model.parents = smplParents();
  model.blendWeights = MatrixX::Zero(v, kJointCount);
  for (Index i = 0; i < v; ++i) {
    for (const auto& [joint, w] : b.weights[i]) model.blendWeights(i, joint) += w;
  }

  // Joint regressor: each joint is the centroid of a ring centered on it;
  // the collars sit inside the upper torso ring and mix its centroid with
  // its lateral vertex.
  model.jointRegressor = MatrixX::Zero(kJointCount, v);
  auto ringCentroid = [&](Index joint, std::size_t tube, std::size_t ring) {
    const Index start = b.ringStarts[tube][ring];
    const Index n = b.ringSegments[tube];
    for (Index k = 0; k < n; ++k) model.jointRegressor(joint, start + k) = 1.0 / static_cast<double>(n);
  };
  // Tube order: 0 torso, 1 left arm, 2 right arm, 3 left leg, 4 left foot,
  // 5 right leg, 6 right foot.
  ringCentroid(0, 0, 2);
  ringCentroid(3, 0, 4);
  ringCentroid(6, 0, 6);
  ringCentroid(9, 0, 8);
  ringCentroid(12, 0, 10);
  ringCentroid(15, 0, 12);
  for (const auto& [arm, shoulder, elbow, wrist, hand] :
       {std::array<Index, 5>{1, 16, 18, 20, 22}, std::array<Index, 5>{2, 17, 19, 21, 23}}) {
    ringCentroid(shoulder, static_cast<std::size_t>(arm), 1);
    ringCentroid(elbow, static_cast<std::size_t>(arm), 5);
    ringCentroid(wrist, static_cast<std::size_t>(arm), 9);
    ringCentroid(hand, static_cast<std::size_t>(arm), 10);
  }
  for (const auto& [leg, foot, hip, knee, ankle, toe] :
       {std::array<Index, 6>{3, 4, 1, 4, 7, 10}, std::array<Index, 6>{5, 6, 2, 5, 8, 11}}) {
    ringCentroid(hip, static_cast<std::size_t>(leg), 1);
    ringCentroid(knee, static_cast<std::size_t>(leg), 6);
    ringCentroid(ankle, static_cast<std::size_t>(leg), 10);
    ringCentroid(toe, static_cast<std::size_t>(foot), 2);
  }
  {
    // Collars at x = +-0.07 inside the torso ring at y = 0.42 (half-width 0.15).
    const Index start = b.ringStarts[0][9];
    const Index n = b.ringSegments[0];
    const double alpha = 0.07 / 0.15;
    for (const auto& [joint, lateral] : {std::pair<Index, Index>{13, 3}, std::pair<Index, Index>{14, 9}}) {
      for (Index k = 0; k < n; ++k) model.jointRegressor(joint, start + k) = (1.0 - alpha) / static_cast<double>(n);
      model.jointRegressor(joint, start + lateral) += alpha;
    }
  }

  // Shape basis: ten smooth, part-localised deformation fields.
  model.shapeBasis = MatrixX::Zero(3 * v, kShapeDim);
  for (Index i = 0; i < v; ++i) {
    const Vec3 p = b.vertices[i];
    const Part part = b.parts[i];
    const double side = b.sides[i];
    const bool head = part == Part::Torso && p.y() > 0.46;
    std::array<Vec3, kShapeDim> field;
    field.fill(Vec3::Zero());
    field[0] = 0.05 * p;
    field[1] = Vec3(0.0, 0.04 * p.y(), 0.0);
    if (part == Part::Torso && !head) field[2] = Vec3(0.08 * p.x(), 0.0, 0.08 * p.z());
    if (part == Part::Torso && !head && p.z() > 0.0 && p.y() > -0.1 && p.y() < 0.3) {
      field[3] = Vec3(0.0, 0.0, 0.3 * p.z() * std::sin(std::numbers::pi * (p.y() + 0.1) / 0.4));
    }
    if (part == Part::Arm) {
      field[4] = Vec3(0.0, 0.15 * (p.y() - 0.44), 0.15 * p.z());
      field[6] = Vec3(0.02 * side, 0.0, 0.0);
    }
    if (part == Part::Leg) field[5] = Vec3(0.15 * (p.x() - 0.09 * side), 0.0, 0.15 * p.z());
    if (part == Part::Leg || part == Part::Foot) {
      field[7] = Vec3(0.0, 0.06 * std::min(p.y() + 0.05, 0.0), 0.0);
      field[8] = Vec3(0.015 * side, 0.0, 0.0);
    }
    if (head) field[9] = Vec3(0.1 * p.x(), 0.1 * (p.y() - 0.6), 0.1 * p.z());
    for (int k = 0; k < kShapeDim; ++k) {
      for (int d = 0; d < 3; ++d) model.shapeBasis(3 * i + d, k) = roundToFloat(field[k](d));
    }
  }
  model.validate();
  return model;
}

TriMesh grid(Index nx, Index ny, double sizeX, double sizeY) {
  if (nx < 1 || ny < 1) throw Error("grid needs at least one cell per axis");
  TriMesh mesh;
  mesh.vertices.resize((nx + 1) * (ny + 1), 3);
  for (Index j = 0; j <= ny; ++j) {
    for (Index i = 0; i <= nx; ++i) {
      mesh.vertices.row(j * (nx + 1) + i) << sizeX * static_cast<double>(i) / static_cast<double>(nx),
          sizeY * static_cast<double>(j) / static_cast<double>(ny), 0.0;
    }
  }
  mesh.faces.resize(2 * nx * ny, 3);
  Index f = 0;
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      const Index a = j * (nx + 1) + i;
      const Index b = a + 1;
      const Index c = a + (nx + 1);
      const Index d = c + 1;
      mesh.faces.row(f++) << a, b, d;
      mesh.faces.row(f++) << a, d, c;
    }
  }
  return mesh;
}

TriMesh icosphere(int level) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                             {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<Index, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<Index, Index>, Index> midpoint;
    auto mid = [&](Index a, Index b) {
      const auto key = std::minmax(a, b);
      const auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const auto id = static_cast<Index>(verts.size() - 1);
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<Index, 3>> next;
    for (const auto& f : faces) {
      const Index ab = mid(f[0], f[1]);
      const Index bc = mid(f[1], f[2]);
      const Index ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  TriMesh mesh;
  mesh.vertices.resize(static_cast<Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(static_cast<Index>(i)) = verts[i].transpose();
  mesh.faces.resize(static_cast<Index>(faces.size()), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    mesh.faces.row(static_cast<Index>(i)) << faces[i][0], faces[i][1], faces[i][2];
  }
  return mesh;
}

}  // namespace drape::procedural
