#pragma once

#include "kinemesh/geometry/tri_mesh.h"

#include <span>
#include <vector>

namespace kinemesh {

struct Neighbor {
  int index = -1;
  double squaredDistance = 0.0;
};

// Exact nearest-neighbour index over a fixed point set (axis-aligned splitting tree).
// Among equidistant points the lowest index wins, so results match a linear scan that
// keeps the first strict minimum.
class PointKdTree {
 public:
  // Throws EmptyInputError for an empty point set.
  explicit PointKdTree(std::span<const Vec3> points);

  Neighbor nearest(const Vec3& query) const;

  size_t size() const {
    return points_.size();
  }
  const Vec3& point(int i) const {
    return points_[i];
  }

 private:
  struct Node {
    // Leaf when left < 0: points order_[begin, end).
    int begin = 0;
    int end = 0;
    int left = -1;
    int right = -1;
    int axis = 0;
    double split = 0.0;
  };

  int build(int begin, int end);
  void search(int node, const Vec3& query, Neighbor& best) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

} // namespace kinemesh
