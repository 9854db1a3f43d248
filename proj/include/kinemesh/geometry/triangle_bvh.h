#pragma once

#include "kinemesh/geometry/tri_mesh.h"

#include <span>
#include <vector>

namespace kinemesh {

// Closest point of triangle (a, b, c) to p, with its barycentric coordinates.
Vec3 closestPointOnTriangle(
    const Vec3& p,
    const Vec3& a,
    const Vec3& b,
    const Vec3& c,
    Vec3* barycentric = nullptr);

struct SurfacePoint {
  Face corners{};
  // Weights of the three corners; they sum to 1.
  Vec3 barycentric = Vec3::Zero();
  Vec3 point = Vec3::Zero();
  double squaredDistance = 0.0;
};

// Bounding-volume hierarchy over triangles, for occlusion and closest-point queries.
class TriangleBvh {
 public:
  explicit TriangleBvh(const TriMesh& mesh);
  // Triangles `faces` over `vertices`; face indices refer into `vertices`.
  TriangleBvh(std::span<const Vec3> vertices, std::vector<Face> faces);

  size_t triangleCount() const {
    return faces_.size();
  }

  // True when the open segment (from, to) crosses any triangle that does not have
  // `ignoreVertex` as a corner (pass -1 to test all triangles).
  bool segmentHits(const Vec3& from, const Vec3& to, int ignoreVertex = -1) const;

  // Exact closest point on the triangles. Throws EmptyInputError without triangles.
  SurfacePoint closestPoint(const Vec3& query) const;

 private:
  struct Node {
    Vec3 lo;
    Vec3 hi;
    int left = -1;
    int right = -1;
    int begin = 0;
    int end = 0;
  };

  void init();
  int build(int begin, int end);
  bool hitsTriangle(int tri, const Vec3& from, const Vec3& dir, int ignoreVertex) const;

  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<Vec3> centroids_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

} // namespace kinemesh
