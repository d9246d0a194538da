#include "drape/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "drape/kdtree.hpp"

namespace drape {

Points sampleSurface(const TriMesh& mesh, int count, std::uint64_t seed) {
  if (mesh.empty()) throw Error("cannot sample an empty mesh");
  if (count < 1) throw Error("sample count must be >= 1");

  std::vector<double> cumulative(static_cast<std::size_t>(mesh.faceCount()));
  double total = 0.0;
  for (Index f = 0; f < mesh.faceCount(); ++f) {
    total += triangleArea(vertexAt(mesh.vertices, mesh.faces(f, 0)),
                          vertexAt(mesh.vertices, mesh.faces(f, 1)),
                          vertexAt(mesh.vertices, mesh.faces(f, 2)));
    cumulative[f] = total;
  }
  if (!(total > 0.0)) throw Error("cannot sample a mesh with zero surface area");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Points out(count, 3);
  for (int i = 0; i < count; ++i) {
    const double pick = uni(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const auto f = static_cast<Index>(it - cumulative.begin());
    const double r1 = std::sqrt(uni(rng));
    const double r2 = uni(rng);
    const Vec3 a = vertexAt(mesh.vertices, mesh.faces(f, 0));
    const Vec3 b = vertexAt(mesh.vertices, mesh.faces(f, 1));
    const Vec3 c = vertexAt(mesh.vertices, mesh.faces(f, 2));
    out.row(i) = ((1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c).transpose();
  }
  return out;
}

namespace {

double meanNearest(const Points& from, const Points& to, bool bruteForce) {
  double sum = 0.0;
  if (bruteForce) {
    for (Index i = 0; i < from.rows(); ++i) {
      sum += std::sqrt(nearestBruteForce(to, vertexAt(from, i)).squaredDistance);
    }
  } else {
    const KdTree tree(to);
    for (Index i = 0; i < from.rows(); ++i) {
      sum += std::sqrt(tree.nearest(vertexAt(from, i)).squaredDistance);
    }
  }
  return sum / static_cast<double>(from.rows());
}

}  // namespace

double chamferPoints(const Points& a, const Points& b, bool bruteForce) {
  if (a.rows() == 0 || b.rows() == 0) throw Error("chamfer distance of an empty point set");
  return 0.5 * (meanNearest(a, b, bruteForce) + meanNearest(b, a, bruteForce));
}

double chamferDistance(const TriMesh& a, const TriMesh& b, int samples, std::uint64_t seed) {
  if (a.empty() || b.empty()) throw Error("chamfer distance of an empty mesh");
  const Points sa = sampleSurface(a, samples, seed);
  const Points sb = sampleSurface(b, samples, seed);
  return kCentimetersPerMeter * chamferPoints(sa, sb);
}

std::vector<double> ccvPerFrame(const MeshSequence& seq) {
  if (seq.size() < 2) throw Error("CCV needs at least 2 frames");
  seq.validate();
  std::vector<double> out;
  for (std::size_t t = 1; t < seq.size(); ++t) {
    const double sq = (seq.frames[t] - seq.frames[t - 1]).rowwise().squaredNorm().sum();
    out.push_back(kCentimetersPerMeter *
                  std::sqrt(sq / static_cast<double>(seq.frames[t].rows())));
  }
  return out;
}

double ccv(const MeshSequence& seq) {
  if (seq.size() < 2) throw Error("CCV needs at least 2 frames");
  seq.validate();
  double sq = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 1; t < seq.size(); ++t) {
    sq += (seq.frames[t] - seq.frames[t - 1]).rowwise().squaredNorm().sum();
    count += static_cast<std::size_t>(seq.frames[t].rows());
  }
  if (count == 0) return 0.0;
  return kCentimetersPerMeter * std::sqrt(sq / static_cast<double>(count));
}

Points RigidTransform::apply(const Points& p) const {
  Points out = p * rotation.transpose();
  out.rowwise() += translation.transpose();
  return out;
}

RigidTransform procrustes(const Points& src, const Points& dst) {
  if (src.rows() != dst.rows()) throw Error("procrustes needs matched point sets");
  if (src.rows() < 3) throw Error("rigid alignment needs at least 3 points");

  const Vec3 cs = src.colwise().mean().transpose();
  const Vec3 cd = dst.colwise().mean().transpose();
  const Points s = src.rowwise() - cs.transpose();
  const Points d = dst.rowwise() - cd.transpose();

  const Mat3 spread = s.transpose() * s;
  const Eigen::JacobiSVD<Mat3> spreadSvd(spread);
  const auto sv = spreadSvd.singularValues();
  if (!(sv(1) > 1e-12 * std::max(sv(0), 1e-300))) {
    throw Error("rigid alignment input is degenerate (collinear points)");
  }

  const Mat3 cov = s.transpose() * d;
  const Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  Mat3 fix = Mat3::Identity();
  if ((v * u.transpose()).determinant() < 0.0) fix(2, 2) = -1.0;

  RigidTransform out;
  out.rotation = v * fix * u.transpose();
  out.translation = cd - out.rotation * cs;
  return out;
}

RigidTransform rigidAlign(const TriMesh& src, const Points& dst, std::uint64_t seed) {
  if (dst.rows() == src.vertices.rows()) return procrustes(src.vertices, dst);
  if (dst.rows() < 3) throw Error("rigid alignment needs at least 3 target points");

  constexpr int kIcpSamples = 2000;
  constexpr int kIcpIterations = 50;
  const Points samples = sampleSurface(src, kIcpSamples, seed);
  const KdTree tree(dst);

  RigidTransform current;
  current.translation =
      dst.colwise().mean().transpose() - samples.colwise().mean().transpose();
  Points matched(samples.rows(), 3);
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kIcpIterations; ++it) {
    const Points moved = current.apply(samples);
    double err = 0.0;
    for (Index i = 0; i < moved.rows(); ++i) {
      const Neighbor nn = tree.nearest(vertexAt(moved, i));
      matched.row(i) = dst.row(nn.index);
      err += nn.squaredDistance;
    }
    current = procrustes(samples, matched);
    if (previous - err <= 1e-14 * std::max(previous, 1.0)) break;
    previous = err;
  }
  return current;
}

}  // namespace drape
