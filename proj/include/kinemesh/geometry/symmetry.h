#pragma once

#include "kinemesh/geometry/tri_mesh.h"

namespace kinemesh {

// Plane {x : <normal, x> = offset}. The normal is normalized on construction.
class SymmetryPlane {
 public:
  // Defaults to the x = 0 plane.
  SymmetryPlane();
  // Throws std::invalid_argument for a zero or non-finite normal.
  SymmetryPlane(const Vec3& normal, double offset);

  const Vec3& normal() const {
    return normal_;
  }
  double offset() const {
    return offset_;
  }

  double signedDistance(const Vec3& p) const {
    return normal_.dot(p) - offset_;
  }

  Vec3 reflect(const Vec3& p) const {
    return p - 2.0 * signedDistance(p) * normal_;
  }

 private:
  Vec3 normal_;
  double offset_;
};

// Mirrors every vertex across the plane; faces are kept as-is.
TriMesh reflect(const TriMesh& mesh, const SymmetryPlane& plane);

} // namespace kinemesh
