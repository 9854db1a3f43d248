#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace kinemesh {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;
using Edge = std::pair<int, int>; // first < second

// Face-induced connectivity shared by a canonical mesh and all of its deformed copies.
struct MeshTopology {
  size_t vertexCount = 0;
  std::vector<Face> faces;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> neighbors;
  // Number of faces incident to each edge, parallel to `edges`.
  std::vector<int> edgeFaceCounts;
};

// Unique undirected edges of a face list, sorted lexicographically.
std::vector<Edge> buildEdges(std::span<const Face> faces);

// Immutable triangle mesh. Non-manifold input is accepted; adjacency is purely face-induced.
class TriMesh {
 public:
  TriMesh() = default;

  // Throws TopologyError on out-of-range or degenerate (repeated index) faces.
  TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  // Same connectivity, new positions. Throws DimensionError on a vertex-count mismatch.
  TriMesh withVertices(std::vector<Vec3> vertices) const;

  size_t vertexCount() const {
    return vertices_.size();
  }
  size_t faceCount() const {
    return topology_ ? topology_->faces.size() : 0;
  }
  bool empty() const {
    return vertices_.empty();
  }

  const std::vector<Vec3>& vertices() const {
    return vertices_;
  }
  const Vec3& vertex(size_t i) const {
    return vertices_[i];
  }
  const std::vector<Face>& faces() const;
  const std::vector<Edge>& edges() const;
  const std::vector<std::vector<int>>& neighbors() const;
  const std::shared_ptr<const MeshTopology>& topology() const {
    return topology_;
  }

  // True when every edge is shared by exactly two faces (and there is at least one face).
  bool isClosed() const;

  // Same vertex count and identical face lists.
  bool sharesTopologyWith(const TriMesh& other) const;

 private:
  TriMesh(std::vector<Vec3> vertices, std::shared_ptr<const MeshTopology> topology);

  std::vector<Vec3> vertices_;
  std::shared_ptr<const MeshTopology> topology_;
};

struct BoundingBox {
  Vec3 min;
  Vec3 max;

  Vec3 extent() const {
    return max - min;
  }
  Vec3 center() const {
    return 0.5 * (min + max);
  }
};

// Throws EmptyInputError on an empty point set.
BoundingBox boundingBox(std::span<const Vec3> points);

// Length of the axis-aligned bounding-box diagonal. Throws EmptyInputError when empty.
double bboxDiagonal(std::span<const Vec3> points);
double bboxDiagonal(const TriMesh& mesh);

} // namespace kinemesh
