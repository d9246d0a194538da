#include "drape/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace drape {

namespace {

inline double squaredDistance(const Points& p, Index i, const Vec3& q) {
  const double dx = p(i, 0) - q.x();
  const double dy = p(i, 1) - q.y();
  const double dz = p(i, 2) - q.z();
  return dx * dx + dy * dy + dz * dz;
}

inline bool better(double d, Index i, const Neighbor& best) {
  return best.index < 0 || d < best.squaredDistance || (d == best.squaredDistance && i < best.index);
}

}  // namespace

KdTree::KdTree(const Points& points) : points_(points) {
  std::vector<Index> ids(static_cast<std::size_t>(points_.rows()));
  std::iota(ids.begin(), ids.end(), 0);
  nodes_.reserve(ids.size());
  root_ = build(ids, 0);
}

Index KdTree::build(std::span<Index> ids, int depth) {
  if (ids.empty()) return -1;
  const int axis = depth % 3;
  const std::size_t mid = ids.size() / 2;
  std::nth_element(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(mid), ids.end(),
                   [&](Index a, Index b) {
                     const double pa = points_(a, axis);
                     const double pb = points_(b, axis);
                     return pa < pb || (pa == pb && a < b);
                   });
  const auto self = static_cast<Index>(nodes_.size());
  nodes_.push_back(Node{ids[mid], axis, -1, -1});
  const Index left = build(ids.subspan(0, mid), depth + 1);
  const Index right = build(ids.subspan(mid + 1), depth + 1);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree::search(Index nodeId, const Vec3& q, Neighbor& best) const {
  if (nodeId < 0) return;
  const Node& node = nodes_[nodeId];
  const double d = squaredDistance(points_, node.point, q);
  if (better(d, node.point, best)) best = Neighbor{node.point, d};

  const double diff = q(node.axis) - points_(node.point, node.axis);
  const Index nearSide = diff < 0.0 ? node.left : node.right;
  const Index farSide = diff < 0.0 ? node.right : node.left;
  search(nearSide, q, best);
  // `<=` keeps equal-distance candidates on the far side reachable for the
  // lowest-index tie-break.
  if (diff * diff <= best.squaredDistance) search(farSide, q, best);
}

Neighbor KdTree::nearest(const Vec3& query) const {
  if (root_ < 0) throw Error("nearest-neighbor query on an empty point set");
  Neighbor best;
  search(root_, query, best);
  return best;
}

Neighbor nearestBruteForce(const Points& points, const Vec3& query) {
  if (points.rows() == 0) throw Error("nearest-neighbor query on an empty point set");
  Neighbor best;
  for (Index i = 0; i < points.rows(); ++i) {
    const double d = squaredDistance(points, i, query);
    if (better(d, i, best)) best = Neighbor{i, d};
  }
  return best;
}

}  // namespace drape
