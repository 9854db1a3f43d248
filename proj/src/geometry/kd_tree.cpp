#include "kinemesh/geometry/kd_tree.h"

#include "kinemesh/common/error.h"

#include <algorithm>
#include <limits>
#include <numeric>

namespace kinemesh {

namespace {
constexpr int kLeafSize = 8;
}

PointKdTree::PointKdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  if (points_.empty()) {
    throw EmptyInputError("nearest-neighbour index over an empty point set");
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  build(0, static_cast<int>(order_.size()));
}

int PointKdTree::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) {
    return id;
  }

  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) {
    return id; // all points coincide
  }

  const int mid = begin + (end - begin) / 2;
  std::nth_element(
      order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
        return points_[a][axis] < points_[b][axis];
      });
  const double split = points_[order_[mid]][axis];

  const int left = build(begin, mid);
  const int right = build(mid, end);
  auto& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void PointKdTree::search(int nodeId, const Vec3& query, Neighbor& best) const {
  const Node& node = nodes_[nodeId];
  if (node.left < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const int idx = order_[i];
      const double d = (points_[idx] - query).squaredNorm();
      if (d < best.squaredDistance || (d == best.squaredDistance && idx < best.index)) {
        best = Neighbor{idx, d};
      }
    }
    return;
  }
  // Points with coordinate == split may sit on either side, so both sides stay eligible
  // until the plane distance strictly exceeds the best distance.
  const double diff = query[node.axis] - node.split;
  const int nearSide = diff < 0.0 ? node.left : node.right;
  const int farSide = diff < 0.0 ? node.right : node.left;
  search(nearSide, query, best);
  if (diff * diff <= best.squaredDistance) {
    search(farSide, query, best);
  }
}

Neighbor PointKdTree::nearest(const Vec3& query) const {
  Neighbor best{-1, std::numeric_limits<double>::infinity()};
  search(0, query, best);
  return best;
}

} // namespace kinemesh
