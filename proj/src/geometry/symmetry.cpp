#include "kinemesh/geometry/symmetry.h"

#include <cmath>
#include <stdexcept>

namespace kinemesh {

SymmetryPlane::SymmetryPlane() : normal_(Vec3::UnitX()), offset_(0.0) {}

SymmetryPlane::SymmetryPlane(const Vec3& normal, double offset) : offset_(offset) {
  const double n = normal.norm();
  if (!(n > 0.0) || !std::isfinite(n) || !std::isfinite(offset)) {
    throw std::invalid_argument("symmetry plane needs a finite nonzero normal");
  }
  normal_ = normal / n;
}

TriMesh reflect(const TriMesh& mesh, const SymmetryPlane& plane) {
  std::vector<Vec3> mirrored;
  mirrored.reserve(mesh.vertexCount());
  for (const auto& v : mesh.vertices()) {
    mirrored.push_back(plane.reflect(v));
  }
  return mesh.withVertices(std::move(mirrored));
}

} // namespace kinemesh
