#pragma once

#include "kinemesh/geometry/tri_mesh.h"

namespace kinemesh {

// Axis-aligned box, 8 vertices and 12 outward-facing triangles.
TriMesh makeBox(const Vec3& min, const Vec3& max);

// Latitude/longitude sphere with poles on the z axis.
TriMesh makeUvSphere(double radius, int rings = 16, int segments = 32, const Vec3& center = Vec3::Zero());

// Flat open grid in the z = 0 plane with nx by ny quads split into triangles.
TriMesh makeGrid(int nx, int ny, double spacing = 1.0);

// Closed tube along +x from 0 to `length` with an elliptic cross-section and
// half-ellipsoid caps that extend `capLength` beyond each end.
struct LimbShape {
  double length = 3.0;
  double radiusY = 0.25;
  double radiusZ = 0.15;
  double capLength = 0.2;
  int axialSegments = 72;
  int radialSegments = 24;
  int capRings = 6;
};

TriMesh makeLimb(const LimbShape& shape);

} // namespace kinemesh
