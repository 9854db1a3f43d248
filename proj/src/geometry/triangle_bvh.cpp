#include "kinemesh/geometry/triangle_bvh.h"

#include "kinemesh/common/error.h"

#include <algorithm>
#include <limits>
#include <numeric>

namespace kinemesh {

namespace {

constexpr int kLeafTriangles = 4;

bool segmentOverlapsBox(const Vec3& from, const Vec3& dir, const Vec3& lo, const Vec3& hi) {
  double t0 = 0.0;
  double t1 = 1.0;
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) {
      if (from[a] < lo[a] || from[a] > hi[a]) {
        return false;
      }
      continue;
    }
    double near = (lo[a] - from[a]) / dir[a];
    double far = (hi[a] - from[a]) / dir[a];
    if (near > far) {
      std::swap(near, far);
    }
    t0 = std::max(t0, near);
    t1 = std::min(t1, far);
    if (t0 > t1) {
      return false;
    }
  }
  return true;
}

double boxSquaredDistance(const Vec3& p, const Vec3& lo, const Vec3& hi) {
  const Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
  return d.squaredNorm();
}

} // namespace

Vec3 closestPointOnTriangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c, Vec3* barycentric) {
  // Voronoi-region walk over vertices, edges and the face interior.
  auto result = [&](double u, double v, double w) {
    if (barycentric != nullptr) {
      *barycentric = Vec3(u, v, w);
    }
    return Vec3(u * a + v * b + w * c);
  };
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    return result(1.0, 0.0, 0.0);
  }
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) {
    return result(0.0, 1.0, 0.0);
  }
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return result(1.0 - v, v, 0.0);
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) {
    return result(0.0, 0.0, 1.0);
  }
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return result(1.0 - w, 0.0, w);
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return result(0.0, 1.0 - w, w);
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return result(1.0 - v - w, v, w);
}

TriangleBvh::TriangleBvh(const TriMesh& mesh) : vertices_(mesh.vertices()), faces_(mesh.faces()) {
  init();
}

TriangleBvh::TriangleBvh(std::span<const Vec3> vertices, std::vector<Face> faces)
    : vertices_(vertices.begin(), vertices.end()), faces_(std::move(faces)) {
  init();
}

void TriangleBvh::init() {
  centroids_.reserve(faces_.size());
  for (const auto& f : faces_) {
    centroids_.push_back((vertices_[f[0]] + vertices_[f[1]] + vertices_[f[2]]) / 3.0);
  }
  order_.resize(faces_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!faces_.empty()) {
    build(0, static_cast<int>(faces_.size()));
  }
}

int TriangleBvh::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo = vertices_[faces_[order_[begin]][0]];
  node.hi = node.lo;
  for (int i = begin; i < end; ++i) {
    for (const int v : faces_[order_[i]]) {
      node.lo = node.lo.cwiseMin(vertices_[v]);
      node.hi = node.hi.cwiseMax(vertices_[v]);
    }
  }
  nodes_.push_back(node);
  if (end - begin <= kLeafTriangles) {
    return id;
  }
  int axis = 0;
  (node.hi - node.lo).maxCoeff(&axis);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(
      order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
        return centroids_[a][axis] < centroids_[b][axis];
      });
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

bool TriangleBvh::hitsTriangle(int tri, const Vec3& from, const Vec3& dir, int ignoreVertex)
    const {
  const auto& f = faces_[tri];
  if (f[0] == ignoreVertex || f[1] == ignoreVertex || f[2] == ignoreVertex) {
    return false;
  }
  // Moller-Trumbore, restricted to the open parameter interval (0, 1).
  const Vec3& a = vertices_[f[0]];
  const Vec3 e1 = vertices_[f[1]] - a;
  const Vec3 e2 = vertices_[f[2]] - a;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  const double scale = e1.norm() * e2.norm() * dir.norm();
  if (std::abs(det) <= 1e-14 * scale) {
    return false;
  }
  const double inv = 1.0 / det;
  const Vec3 s = from - a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) {
    return false;
  }
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) {
    return false;
  }
  const double t = e2.dot(q) * inv;
  constexpr double kEps = 1e-9;
  return t > kEps && t < 1.0 - kEps;
}

bool TriangleBvh::segmentHits(const Vec3& from, const Vec3& to, int ignoreVertex) const {
  if (nodes_.empty()) {
    return false;
  }
  const Vec3 dir = to - from;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (!segmentOverlapsBox(from, dir, node.lo, node.hi)) {
      continue;
    }
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        if (hitsTriangle(order_[i], from, dir, ignoreVertex)) {
          return true;
        }
      }
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return false;
}

SurfacePoint TriangleBvh::closestPoint(const Vec3& query) const {
  if (nodes_.empty()) {
    throw EmptyInputError("closest-point query on a surface without triangles");
  }
  SurfacePoint best;
  best.squaredDistance = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, int>> stack{{0.0, 0}};
  while (!stack.empty()) {
    const auto [bound, id] = stack.back();
    stack.pop_back();
    if (bound >= best.squaredDistance) {
      continue;
    }
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const auto& f = faces_[order_[i]];
        Vec3 bary;
        const Vec3 q = closestPointOnTriangle(query, vertices_[f[0]], vertices_[f[1]], vertices_[f[2]], &bary);
        const double d = (q - query).squaredNorm();
        if (d < best.squaredDistance) {
          best = {f, bary, q, d};
        }
      }
      continue;
    }
    const double dl = boxSquaredDistance(query, nodes_[node.left].lo, nodes_[node.left].hi);
    const double dr = boxSquaredDistance(query, nodes_[node.right].lo, nodes_[node.right].hi);
    // Visit the nearer child first.
    if (dl <= dr) {
      stack.emplace_back(dr, node.right);
      stack.emplace_back(dl, node.left);
    } else {
      stack.emplace_back(dl, node.left);
      stack.emplace_back(dr, node.right);
    }
  }
  return best;
}

} // namespace kinemesh
