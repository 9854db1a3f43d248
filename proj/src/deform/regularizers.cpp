#include "kinemesh/deform/regularizers.h"

#include "kinemesh/common/error.h"
#include "kinemesh/common/parallel.h"
#include "kinemesh/geometry/kd_tree.h"

#include <fmt/format.h>

namespace kinemesh {

namespace {

void prepare(std::vector<Vec3>* gradient, size_t n) {
  if (gradient != nullptr && gradient->empty()) {
    gradient->assign(n, Vec3::Zero());
  }
  if (gradient != nullptr && gradient->size() != n) {
    throw DimensionError(fmt::format("gradient buffer has {} entries, expected {}", gradient->size(), n));
  }
}

} // namespace

std::vector<int> symmetryPartners(std::span<const Vec3> vertices, const SymmetryPlane& plane) {
  const PointKdTree tree(vertices);
  std::vector<int> partners(vertices.size());
  const auto n = static_cast<std::ptrdiff_t>(vertices.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    partners[i] = tree.nearest(plane.reflect(vertices[i])).index;
  }
  return partners;
}

double symmetryLoss(
    std::span<const Vec3> vertices,
    const SymmetryPlane& plane,
    std::span<const int> partners,
    std::vector<Vec3>* gradient) {
  const size_t n = vertices.size();
  if (n == 0) {
    throw EmptyInputError("symmetry loss of an empty vertex set");
  }
  if (partners.size() != n) {
    throw DimensionError("symmetry partners do not match the vertex count");
  }
  prepare(gradient, n);
  std::vector<double> terms(n);
  const Vec3& normal = plane.normal();
  const double scale = 2.0 / static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    const Vec3 r = vertices[partners[i]] - plane.reflect(vertices[i]);
    terms[i] = r.squaredNorm();
    if (gradient != nullptr) {
      (*gradient)[partners[i]] += scale * r;
      // d reflect(v)/dv = I - 2 n n^T (symmetric)
      (*gradient)[i] -= scale * (r - 2.0 * normal.dot(r) * normal);
    }
  }
  return stableMean(terms);
}

double symmetryLoss(std::span<const Vec3> vertices, const SymmetryPlane& plane) {
  const auto partners = symmetryPartners(vertices, plane);
  return symmetryLoss(vertices, plane, partners);
}

double symmetryLoss(const TriMesh& mesh, const SymmetryPlane& plane) {
  return symmetryLoss(mesh.vertices(), plane);
}

double laplacianLoss(const TriMesh& mesh, std::span<const Vec3> vertices, std::vector<Vec3>* gradient) {
  const size_t n = mesh.vertexCount();
  if (vertices.size() != n) {
    throw DimensionError(fmt::format("{} vertices for a mesh with {}", vertices.size(), n));
  }
  if (n == 0) {
    return 0.0;
  }
  prepare(gradient, n);
  const auto& neighbors = mesh.neighbors();
  std::vector<Vec3> delta(n, Vec3::Zero());
  std::vector<double> terms(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    if (neighbors[i].empty()) {
      continue;
    }
    Vec3 mean = Vec3::Zero();
    for (const int j : neighbors[i]) {
      mean += vertices[j];
    }
    mean /= static_cast<double>(neighbors[i].size());
    delta[i] = vertices[i] - mean;
    terms[i] = delta[i].squaredNorm();
  }
  if (gradient != nullptr) {
    const double scale = 2.0 / static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
      if (neighbors[i].empty()) {
        continue;
      }
      (*gradient)[i] += scale * delta[i];
      const Vec3 spread = scale * delta[i] / static_cast<double>(neighbors[i].size());
      for (const int j : neighbors[i]) {
        (*gradient)[j] -= spread;
      }
    }
  }
  return stableMean(terms);
}

double laplacianLoss(const TriMesh& mesh) {
  return laplacianLoss(mesh, mesh.vertices());
}

double dynamicRigidityLoss(
    const TriMesh& mesh,
    std::span<const Vec3> current,
    std::span<const Vec3> previous,
    std::vector<Vec3>* gradient) {
  const size_t n = mesh.vertexCount();
  if (current.size() != n || previous.size() != n) {
    throw DimensionError("rigidity frames do not match the mesh vertex count");
  }
  const auto& edges = mesh.edges();
  if (edges.empty()) {
    return 0.0;
  }
  prepare(gradient, n);
  std::vector<double> terms(edges.size());
  const double scale = 2.0 / static_cast<double>(edges.size());
  for (size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    const Vec3 d = current[i] - current[j];
    const double length = d.norm();
    const double residual = length - (previous[i] - previous[j]).norm();
    terms[e] = residual * residual;
    if (gradient != nullptr && length > 0.0) {
      const Vec3 g = scale * residual * d / length;
      (*gradient)[i] += g;
      (*gradient)[j] -= g;
    }
  }
  return stableMean(terms);
}

double dynamicRigidityLoss(const DeformedMesh& current, const DeformedMesh& previous) {
  if (!current.sameBase(previous)) {
    throw DimensionError("rigidity loss between frames of different base meshes");
  }
  return dynamicRigidityLoss(current.mesh, current.vertices(), previous.vertices());
}

} // namespace kinemesh
