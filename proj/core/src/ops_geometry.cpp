#include "drape/geometry_ops.hpp"

#include <cmath>

#include "drape/kdtree.hpp"

namespace drape::ad {

namespace {

using RowMat3 = Eigen::Matrix<double, 3, 3, Eigen::RowMajor>;

Mat3 skew(const Vec3& r) {
  Mat3 k;
  k << 0.0, -r.z(), r.y(), r.z(), 0.0, -r.x(), -r.y(), r.x(), 0.0;
  return k;
}

Vec3 row3(std::span<const double> v, std::size_t i) { return Vec3(v[3 * i], v[3 * i + 1], v[3 * i + 2]); }

void addRow3(std::span<double> g, std::size_t i, const Vec3& d) {
  g[3 * i] += d.x();
  g[3 * i + 1] += d.y();
  g[3 * i + 2] += d.z();
}

Mat3 mat3At(std::span<const double> v, std::size_t k) {
  return Eigen::Map<const RowMat3>(v.data() + 9 * k);
}

void requireRows(Var v, std::size_t cols, const char* what) {
  if (v.shape().size() != 2 || v.shape()[1] != cols) {
    throw Error(std::string(what) + ": expected [n x " + std::to_string(cols) + "], got " +
                shapeString(v.shape()));
  }
}

struct RodriguesCoefficients {
  double a;  // sin(θ)/θ
  double b;  // (1 - cos θ)/θ²
  double c;  // (dA/dθ)/θ
  double d;  // (dB/dθ)/θ
};

RodriguesCoefficients rodriguesCoefficients(double angle) {
  RodriguesCoefficients k{};
  const double a2 = angle * angle;
  if (angle < 1e-8) {
    k.a = 1.0 - a2 / 6.0;
    k.b = 0.5 - a2 / 24.0;
  } else {
    const double half = std::sin(0.5 * angle);
    k.a = std::sin(angle) / angle;
    k.b = 2.0 * half * half / a2;
  }
  if (angle < 1e-3) {
    k.c = -1.0 / 3.0 + a2 / 30.0 - a2 * a2 / 840.0;
    k.d = -1.0 / 12.0 + a2 / 180.0 - a2 * a2 / 6720.0;
  } else {
    const double s = std::sin(angle);
    const double co = std::cos(angle);
    k.c = (angle * co - s) / (a2 * angle);
    k.d = (angle * s - 2.0 * (1.0 - co)) / (a2 * a2);
  }
  return k;
}

/// Topological order (parents first). Throws on cycles or bad indices.
std::vector<Index> kinematicOrder(std::span<const Index> parents) {
  const auto k = static_cast<Index>(parents.size());
  std::vector<int> state(parents.size(), 0);  // 0 new, 1 visiting, 2 done
  std::vector<Index> order;
  order.reserve(parents.size());
  for (Index j = 0; j < k; ++j) {
    std::vector<Index> chain;
    Index cur = j;
    while (cur >= 0 && state[cur] != 2) {
      if (state[cur] == 1) throw Error("kinematic tree has a cycle through joint " + std::to_string(cur));
      state[cur] = 1;
      chain.push_back(cur);
      const Index p = parents[cur];
      if (p >= k || p < -1) throw Error("joint " + std::to_string(cur) + " has invalid parent " + std::to_string(p));
      cur = p;
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      state[*it] = 2;
      order.push_back(*it);
    }
  }
  return order;
}

}  // namespace

Var rodrigues(Var axisAngles) {
  requireRows(axisAngles, 3, "rodrigues");
  const std::size_t k = axisAngles.shape()[0];
  const auto r = axisAngles.value();
  std::vector<double> out(9 * k);
  for (std::size_t j = 0; j < k; ++j) {
    const Vec3 w = row3(r, j);
    const auto c = rodriguesCoefficients(w.norm());
    const Mat3 kx = skew(w);
    const Mat3 rot = Mat3::Identity() + c.a * kx + c.b * kx * kx;
    Eigen::Map<RowMat3>(out.data() + 9 * j) = rot;
  }
  return axisAngles.tape().record(
      std::move(out), Shape{k, 9}, {axisAngles}, [axisAngles, k](std::span<const double> g, Tape& t) {
        const auto r = axisAngles.value();
        auto gr = t.gradBuffer(axisAngles);
        for (std::size_t j = 0; j < k; ++j) {
          const Vec3 w = row3(r, j);
          const auto c = rodriguesCoefficients(w.norm());
          const Mat3 kx = skew(w);
          const Mat3 kx2 = kx * kx;
          const Mat3 gm = mat3At(g, j);
          for (int i = 0; i < 3; ++i) {
            const Mat3 ei = skew(Vec3::Unit(i));
            const Mat3 dr = c.c * w(i) * kx + c.a * ei + c.d * w(i) * kx2 + c.b * (ei * kx + kx * ei);
            gr[3 * j + i] += (gm.array() * dr.array()).sum();
          }
        }
      });
}

Var forwardKinematics(Var localRotations, Var restJoints, std::span<const Index> parents) {
  requireRows(localRotations, 9, "forwardKinematics");
  requireRows(restJoints, 3, "forwardKinematics");
  const std::size_t k = parents.size();
  if (localRotations.shape()[0] != k || restJoints.shape()[0] != k) {
    throw Error("forwardKinematics: joint count mismatch");
  }
  const auto order = kinematicOrder(parents);
  const auto rv = localRotations.value();
  const auto jv = restJoints.value();

  std::vector<Mat3> globalRot(k);
  std::vector<Vec3> globalTrans(k);
  for (Index j : order) {
    const Mat3 local = mat3At(rv, j);
    const Index p = parents[j];
    if (p < 0) {
      globalRot[j] = local;
      globalTrans[j] = row3(jv, j);
    } else {
      globalRot[j] = globalRot[p] * local;
      globalTrans[j] = globalRot[p] * (row3(jv, j) - row3(jv, p)) + globalTrans[p];
    }
  }
  std::vector<double> out(12 * k);
  for (std::size_t j = 0; j < k; ++j) {
    const Vec3 t = globalTrans[j] - globalRot[j] * row3(jv, j);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out[12 * j + 4 * r + c] = globalRot[j](r, c);
      out[12 * j + 4 * r + 3] = t(r);
    }
  }
  std::vector<Index> parentCopy(parents.begin(), parents.end());
  return localRotations.tape().record(
      std::move(out), Shape{k, 12}, {localRotations, restJoints},
      [localRotations, restJoints, parentCopy, order, globalRot, globalTrans, k](
          std::span<const double> g, Tape& t) {
        const auto rv = localRotations.value();
        const auto jv = restJoints.value();
        std::vector<Mat3> gRot(k, Mat3::Zero());
        std::vector<Vec3> gTrans(k, Vec3::Zero());
        std::vector<Vec3> gJoint(k, Vec3::Zero());
        std::vector<Mat3> gLocal(k, Mat3::Zero());
        for (std::size_t j = 0; j < k; ++j) {
          Mat3 gr;
          Vec3 gt;
          for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) gr(r, c) = g[12 * j + 4 * r + c];
            gt(r) = g[12 * j + 4 * r + 3];
          }
          const Vec3 joint = row3(jv, j);
          gRot[j] += gr - gt * joint.transpose();
          gTrans[j] += gt;
          gJoint[j] -= globalRot[j].transpose() * gt;
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
          const Index j = *it;
          const Index p = parentCopy[j];
          const Mat3 local = mat3At(rv, j);
          if (p < 0) {
            gLocal[j] += gRot[j];
            gJoint[j] += gTrans[j];
            continue;
          }
          const Vec3 offset = row3(jv, j) - row3(jv, p);
          gRot[p] += gRot[j] * local.transpose();
          gLocal[j] += globalRot[p].transpose() * gRot[j];
          gRot[p] += gTrans[j] * offset.transpose();
          const Vec3 gOffset = globalRot[p].transpose() * gTrans[j];
          gJoint[j] += gOffset;
          gJoint[p] -= gOffset;
          gTrans[p] += gTrans[j];
        }
        auto gl = t.gradBuffer(localRotations);
        if (!gl.empty()) {
          for (std::size_t j = 0; j < k; ++j) {
            for (int r = 0; r < 3; ++r) {
              for (int c = 0; c < 3; ++c) gl[9 * j + 3 * r + c] += gLocal[j](r, c);
            }
          }
        }
        auto gj = t.gradBuffer(restJoints);
        if (!gj.empty()) {
          for (std::size_t j = 0; j < k; ++j) addRow3(gj, j, gJoint[j]);
        }
      });
}

Var linearBlendSkinning(Var vertices, Var weights, Var transforms) {
  requireRows(vertices, 3, "linearBlendSkinning");
  requireRows(transforms, 12, "linearBlendSkinning");
  const std::size_t n = vertices.shape()[0];
  const std::size_t k = transforms.shape()[0];
  if (weights.shape() != Shape{n, k}) {
    throw Error("linearBlendSkinning: weights " + shapeString(weights.shape()) + " expected [" +
                std::to_string(n) + "x" + std::to_string(k) + "]");
  }
  const auto vv = vertices.value();
  const auto wv = weights.value();
  const auto av = transforms.value();
  std::vector<double> out(3 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = vv[3 * i], y = vv[3 * i + 1], z = vv[3 * i + 2];
    for (std::size_t j = 0; j < k; ++j) {
      const double w = wv[i * k + j];
      if (w == 0.0) continue;
      const double* a = av.data() + 12 * j;
      for (int r = 0; r < 3; ++r) {
        out[3 * i + r] += w * (a[4 * r] * x + a[4 * r + 1] * y + a[4 * r + 2] * z + a[4 * r + 3]);
      }
    }
  }
  return vertices.tape().record(
      std::move(out), Shape{n, 3}, {vertices, weights, transforms},
      [vertices, weights, transforms, n, k](std::span<const double> g, Tape& t) {
        const auto vv = vertices.value();
        const auto wv = weights.value();
        const auto av = transforms.value();
        auto gv = t.gradBuffer(vertices);
        auto gw = t.gradBuffer(weights);
        auto ga = t.gradBuffer(transforms);
        for (std::size_t i = 0; i < n; ++i) {
          const double p[4] = {vv[3 * i], vv[3 * i + 1], vv[3 * i + 2], 1.0};
          const double* gi = g.data() + 3 * i;
          for (std::size_t j = 0; j < k; ++j) {
            const double w = wv[i * k + j];
            const double* a = av.data() + 12 * j;
            if (!gw.empty()) {
              double acc = 0.0;
              for (int r = 0; r < 3; ++r) {
                acc += gi[r] * (a[4 * r] * p[0] + a[4 * r + 1] * p[1] + a[4 * r + 2] * p[2] + a[4 * r + 3]);
              }
              gw[i * k + j] += acc;
            }
            if (w == 0.0) continue;
            if (!gv.empty()) {
              for (int c = 0; c < 3; ++c) {
                gv[3 * i + c] += w * (a[c] * gi[0] + a[4 + c] * gi[1] + a[8 + c] * gi[2]);
              }
            }
            if (!ga.empty()) {
              double* gaj = ga.data() + 12 * j;
              for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 4; ++c) gaj[4 * r + c] += w * gi[r] * p[c];
              }
            }
          }
        }
      });
}

Var edgeLengths(Var vertices, std::span<const Edge> edges) {
  requireRows(vertices, 3, "edgeLengths");
  const auto vv = vertices.value();
  const std::size_t nv = vertices.shape()[0];
  std::vector<double> out(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (static_cast<std::size_t>(edges[e].a) >= nv || static_cast<std::size_t>(edges[e].b) >= nv) {
      throw Error("edgeLengths: edge " + std::to_string(e) + " out of range");
    }
    out[e] = (row3(vv, edges[e].a) - row3(vv, edges[e].b)).norm();
  }
  std::vector<Edge> edgeCopy(edges.begin(), edges.end());
  return vertices.tape().record(
      out, Shape{edges.size()}, {vertices},
      [vertices, edgeCopy, lengths = out](std::span<const double> g, Tape& t) {
        const auto vv = vertices.value();
        auto gv = t.gradBuffer(vertices);
        for (std::size_t e = 0; e < edgeCopy.size(); ++e) {
          if (!(lengths[e] > 0.0)) continue;
          const Vec3 u = (row3(vv, edgeCopy[e].a) - row3(vv, edgeCopy[e].b)) / lengths[e];
          addRow3(gv, edgeCopy[e].a, g[e] * u);
          addRow3(gv, edgeCopy[e].b, -g[e] * u);
        }
      });
}

Var faceNormals(Var vertices, const Faces& faces) {
  requireRows(vertices, 3, "faceNormals");
  const auto vv = vertices.value();
  const auto f = static_cast<std::size_t>(faces.rows());
  std::vector<double> out(3 * f);
  std::vector<double> lengths(f);
  for (std::size_t i = 0; i < f; ++i) {
    const Vec3 a = row3(vv, faces(i, 0));
    const Vec3 c = (row3(vv, faces(i, 1)) - a).cross(row3(vv, faces(i, 2)) - a);
    lengths[i] = c.norm();
    if (!(lengths[i] > 0.0)) throw Error("zero-area face " + std::to_string(i));
    const Vec3 n = c / lengths[i];
    for (int r = 0; r < 3; ++r) out[3 * i + r] = n(r);
  }
  return vertices.tape().record(
      out, Shape{f, 3}, {vertices},
      [vertices, faces, normals = out, lengths](std::span<const double> g, Tape& t) {
        const auto vv = vertices.value();
        auto gv = t.gradBuffer(vertices);
        for (std::size_t i = 0; i < lengths.size(); ++i) {
          const Vec3 n = row3(normals, i);
          const Vec3 gn = row3(g, i);
          const Vec3 gc = (gn - n * n.dot(gn)) / lengths[i];
          const Vec3 a = row3(vv, faces(i, 0));
          const Vec3 e1 = row3(vv, faces(i, 1)) - a;
          const Vec3 e2 = row3(vv, faces(i, 2)) - a;
          const Vec3 ge1 = e2.cross(gc);
          const Vec3 ge2 = gc.cross(e1);
          addRow3(gv, faces(i, 1), ge1);
          addRow3(gv, faces(i, 2), ge2);
          addRow3(gv, faces(i, 0), -(ge1 + ge2));
        }
      });
}

Var vertexNormals(Var vertices, const Faces& faces) {
  requireRows(vertices, 3, "vertexNormals");
  const auto vv = vertices.value();
  const std::size_t n = vertices.shape()[0];
  std::vector<Vec3> sums(n, Vec3::Zero());
  for (Eigen::Index i = 0; i < faces.rows(); ++i) {
    const Vec3 a = row3(vv, faces(i, 0));
    const Vec3 c = (row3(vv, faces(i, 1)) - a).cross(row3(vv, faces(i, 2)) - a);
    for (int k = 0; k < 3; ++k) sums[faces(i, k)] += c;
  }
  std::vector<double> out(3 * n, 0.0);
  std::vector<double> lengths(n);
  for (std::size_t v = 0; v < n; ++v) {
    lengths[v] = sums[v].norm();
    if (lengths[v] > 0.0) {
      for (int r = 0; r < 3; ++r) out[3 * v + r] = sums[v](r) / lengths[v];
    }
  }
  return vertices.tape().record(
      out, Shape{n, 3}, {vertices},
      [vertices, faces, normals = out, lengths](std::span<const double> g, Tape& t) {
        const auto vv = vertices.value();
        auto gv = t.gradBuffer(vertices);
        std::vector<Vec3> gSum(lengths.size(), Vec3::Zero());
        for (std::size_t v = 0; v < lengths.size(); ++v) {
          if (!(lengths[v] > 0.0)) continue;
          const Vec3 nv = row3(normals, v);
          const Vec3 gn = row3(g, v);
          gSum[v] = (gn - nv * nv.dot(gn)) / lengths[v];
        }
        for (Eigen::Index i = 0; i < faces.rows(); ++i) {
          const Vec3 gc = gSum[faces(i, 0)] + gSum[faces(i, 1)] + gSum[faces(i, 2)];
          const Vec3 a = row3(vv, faces(i, 0));
          const Vec3 e1 = row3(vv, faces(i, 1)) - a;
          const Vec3 e2 = row3(vv, faces(i, 2)) - a;
          const Vec3 ge1 = e2.cross(gc);
          const Vec3 ge2 = gc.cross(e1);
          addRow3(gv, faces(i, 1), ge1);
          addRow3(gv, faces(i, 2), ge2);
          addRow3(gv, faces(i, 0), -(ge1 + ge2));
        }
      });
}

Var dihedralAngles(Var faceNormals, std::span<const DihedralPair> pairs) {
  requireRows(faceNormals, 3, "dihedralAngles");
  const auto nv = faceNormals.value();
  std::vector<double> out(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const Vec3 na = row3(nv, pairs[p].faceA);
    const Vec3 nb = row3(nv, pairs[p].faceB);
    out[p] = std::atan2(na.cross(nb).norm(), na.dot(nb));
  }
  std::vector<DihedralPair> pairCopy(pairs.begin(), pairs.end());
  return faceNormals.tape().record(
      std::move(out), Shape{pairs.size()}, {faceNormals},
      [faceNormals, pairCopy](std::span<const double> g, Tape& t) {
        const auto nv = faceNormals.value();
        auto gn = t.gradBuffer(faceNormals);
        for (std::size_t p = 0; p < pairCopy.size(); ++p) {
          if (g[p] == 0.0) continue;
          const Vec3 na = row3(nv, pairCopy[p].faceA);
          const Vec3 nb = row3(nv, pairCopy[p].faceB);
          const Vec3 c = na.cross(nb);
          const double s = c.norm();
          const double d = na.dot(nb);
          const double denom = s * s + d * d;
          if (!(denom > 0.0)) continue;
          Vec3 ga = Vec3::Zero();
          Vec3 gb = Vec3::Zero();
          if (s > 0.0) {
            const Vec3 gc = (g[p] * d / (denom * s)) * c;
            ga += nb.cross(gc);
            gb += gc.cross(na);
          }
          const double gd = -g[p] * s / denom;
          ga += gd * nb;
          gb += gd * na;
          addRow3(gn, pairCopy[p].faceA, ga);
          addRow3(gn, pairCopy[p].faceB, gb);
        }
      });
}

Var faceLaplacian(Var faceNormals, const std::vector<std::vector<Index>>& adjacency) {
  requireRows(faceNormals, 3, "faceLaplacian");
  const std::size_t f = faceNormals.shape()[0];
  if (adjacency.size() != f) throw Error("faceLaplacian: adjacency does not match face count");
  const auto nv = faceNormals.value();
  std::vector<double> out(3 * f, 0.0);
  for (std::size_t i = 0; i < f; ++i) {
    if (adjacency[i].empty()) continue;
    Vec3 mean = Vec3::Zero();
    for (Index j : adjacency[i]) mean += row3(nv, j);
    mean /= static_cast<double>(adjacency[i].size());
    const Vec3 l = mean - row3(nv, i);
    for (int r = 0; r < 3; ++r) out[3 * i + r] = l(r);
  }
  return faceNormals.tape().record(
      std::move(out), Shape{f, 3}, {faceNormals},
      [faceNormals, adjacency](std::span<const double> g, Tape& t) {
        auto gn = t.gradBuffer(faceNormals);
        for (std::size_t i = 0; i < adjacency.size(); ++i) {
          if (adjacency[i].empty()) continue;
          const Vec3 gi = row3(g, i);
          const double w = 1.0 / static_cast<double>(adjacency[i].size());
          for (Index j : adjacency[i]) addRow3(gn, j, w * gi);
          addRow3(gn, i, -gi);
        }
      });
}

Var collisionPenalty(Var garmentVertices, const Points& bodyVertices,
                     std::span<const Vec3> bodyNormals, const CollisionSettings& settings) {
  requireRows(garmentVertices, 3, "collisionPenalty");
  if (static_cast<std::size_t>(bodyVertices.rows()) != bodyNormals.size()) {
    throw Error("collisionPenalty: body vertex and normal counts differ");
  }
  const auto gv = garmentVertices.value();
  const std::size_t n = garmentVertices.shape()[0];
  Points garment = Eigen::Map<const Points>(gv.data(), static_cast<Eigen::Index>(n), 3);
  const KdTree tree(garment);

  struct Active {
    Index garmentVertex;
    Vec3 normal;
    double hinge;
  };
  std::vector<Active> active;
  double total = 0.0;
  const double radiusSq = settings.radius * settings.radius;
  for (Index j = 0; j < bodyVertices.rows(); ++j) {
    const Vec3 b = vertexAt(bodyVertices, j);
    const Neighbor nn = tree.nearest(b);
    if (nn.squaredDistance > radiusSq) continue;
    const Vec3 d = vertexAt(garment, nn.index) - b;
    const double hinge = settings.epsilon - d.dot(bodyNormals[j]);
    if (hinge > 0.0) {
      total += hinge * hinge;
      active.push_back(Active{nn.index, bodyNormals[j], hinge});
    }
  }
  return garmentVertices.tape().record(
      {total}, Shape{1}, {garmentVertices}, [garmentVertices, active](std::span<const double> g, Tape& t) {
        auto gg = t.gradBuffer(garmentVertices);
        for (const Active& a : active) addRow3(gg, a.garmentVertex, -2.0 * a.hinge * g[0] * a.normal);
      });
}

}  // namespace drape::ad
