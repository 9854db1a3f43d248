#include "kinemesh/geometry/tri_mesh.h"

#include "kinemesh/common/error.h"

#include <fmt/format.h>

#include <algorithm>
#include <map>

namespace kinemesh {

namespace {

const std::vector<Face> kNoFaces;
const std::vector<Edge> kNoEdges;
const std::vector<std::vector<int>> kNoNeighbors;

std::shared_ptr<const MeshTopology> buildTopology(size_t vertexCount, std::vector<Face> faces) {
  for (size_t f = 0; f < faces.size(); ++f) {
    const auto& face = faces[f];
    for (const int v : face) {
      if (v < 0 || static_cast<size_t>(v) >= vertexCount) {
        throw TopologyError(fmt::format(
            "face {} references vertex {} but the mesh has {} vertices", f, v, vertexCount));
      }
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      throw TopologyError(fmt::format(
          "face {} is degenerate ({} {} {})", f, face[0], face[1], face[2]));
    }
  }

  auto topology = std::make_shared<MeshTopology>();
  topology->vertexCount = vertexCount;

  std::map<Edge, int> edgeFaces;
  for (const auto& face : faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = face[k];
      const int b = face[(k + 1) % 3];
      edgeFaces[{std::min(a, b), std::max(a, b)}] += 1;
    }
  }
  topology->edges.reserve(edgeFaces.size());
  topology->edgeFaceCounts.reserve(edgeFaces.size());
  topology->neighbors.resize(vertexCount);
  for (const auto& [edge, count] : edgeFaces) {
    topology->edges.push_back(edge);
    topology->edgeFaceCounts.push_back(count);
    topology->neighbors[edge.first].push_back(edge.second);
    topology->neighbors[edge.second].push_back(edge.first);
  }
  for (auto& n : topology->neighbors) {
    std::sort(n.begin(), n.end());
  }
  topology->faces = std::move(faces);
  return topology;
}

} // namespace

std::vector<Edge> buildEdges(std::span<const Face> faces) {
  std::vector<Edge> edges;
  edges.reserve(faces.size() * 3);
  for (const auto& face : faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = face[k];
      const int b = face[(k + 1) % 3];
      edges.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)) {
  topology_ = buildTopology(vertices_.size(), std::move(faces));
}

TriMesh::TriMesh(std::vector<Vec3> vertices, std::shared_ptr<const MeshTopology> topology)
    : vertices_(std::move(vertices)), topology_(std::move(topology)) {}

TriMesh TriMesh::withVertices(std::vector<Vec3> vertices) const {
  if (vertices.size() != vertices_.size()) {
    throw DimensionError(fmt::format(
        "expected {} vertices, got {}", vertices_.size(), vertices.size()));
  }
  return TriMesh(std::move(vertices), topology_);
}

const std::vector<Face>& TriMesh::faces() const {
  return topology_ ? topology_->faces : kNoFaces;
}

const std::vector<Edge>& TriMesh::edges() const {
  return topology_ ? topology_->edges : kNoEdges;
}

const std::vector<std::vector<int>>& TriMesh::neighbors() const {
  return topology_ ? topology_->neighbors : kNoNeighbors;
}

bool TriMesh::isClosed() const {
  if (!topology_ || topology_->faces.empty()) {
    return false;
  }
  return std::all_of(
      topology_->edgeFaceCounts.begin(), topology_->edgeFaceCounts.end(), [](int c) {
        return c == 2;
      });
}

bool TriMesh::sharesTopologyWith(const TriMesh& other) const {
  if (vertexCount() != other.vertexCount()) {
    return false;
  }
  if (topology_ == other.topology_) {
    return true;
  }
  return faces() == other.faces();
}

BoundingBox boundingBox(std::span<const Vec3> points) {
  if (points.empty()) {
    throw EmptyInputError("bounding box of an empty point set");
  }
  BoundingBox box{points.front(), points.front()};
  for (const auto& p : points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

double bboxDiagonal(std::span<const Vec3> points) {
  return boundingBox(points).extent().norm();
}

double bboxDiagonal(const TriMesh& mesh) {
  return bboxDiagonal(mesh.vertices());
}

} // namespace kinemesh
