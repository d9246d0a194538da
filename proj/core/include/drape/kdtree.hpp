#pragma once

#include <span>
#include <vector>

#include "drape/common.hpp"

namespace drape {

struct Neighbor {
  Index index = -1;
  double squaredDistance = 0.0;
};

/// Static 3-d tree for exact nearest-neighbor queries. Ties on distance are
/// broken toward the lowest point index, so results match an exhaustive scan
/// bit for bit.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(const Points& points);

  [[nodiscard]] Neighbor nearest(const Vec3& query) const;
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }

 private:
  struct Node {
    Index point = -1;
    int axis = 0;
    Index left = -1;
    Index right = -1;
  };

  Index build(std::span<Index> ids, int depth);
  void search(Index node, const Vec3& q, Neighbor& best) const;

  Points points_;
  std::vector<Node> nodes_;
  Index root_ = -1;
};

/// Exhaustive O(n) reference scan with the same tie-break as KdTree.
Neighbor nearestBruteForce(const Points& points, const Vec3& query);

}  // namespace drape
