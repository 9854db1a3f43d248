#include "kinemesh/geometry/primitives.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kinemesh {

namespace {

// Connects ring `a` to ring `b` (each `n` vertices, same angular layout) with quads.
void stitchRings(std::vector<Face>& faces, int a, int b, int n) {
  for (int k = 0; k < n; ++k) {
    const int k1 = (k + 1) % n;
    faces.push_back({a + k, b + k, b + k1});
    faces.push_back({a + k, b + k1, a + k1});
  }
}

void fanToPole(std::vector<Face>& faces, int pole, int ring, int n, bool reversed) {
  for (int k = 0; k < n; ++k) {
    const int k1 = (k + 1) % n;
    if (reversed) {
      faces.push_back({pole, ring + k1, ring + k});
    } else {
      faces.push_back({pole, ring + k, ring + k1});
    }
  }
}

} // namespace

TriMesh makeBox(const Vec3& lo, const Vec3& hi) {
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) {
    v.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(), (i & 4) ? hi.z() : lo.z());
  }
  std::vector<Face> f = {
      {0, 2, 3}, {0, 3, 1}, // z = lo
      {4, 5, 7}, {4, 7, 6}, // z = hi
      {0, 1, 5}, {0, 5, 4}, // y = lo
      {2, 6, 7}, {2, 7, 3}, // y = hi
      {0, 4, 6}, {0, 6, 2}, // x = lo
      {1, 3, 7}, {1, 7, 5}, // x = hi
  };
  return TriMesh(std::move(v), std::move(f));
}

TriMesh makeUvSphere(double radius, int rings, int segments, const Vec3& center) {
  if (rings < 2 || segments < 3) {
    throw std::invalid_argument("sphere needs at least 2 rings and 3 segments");
  }
  std::vector<Vec3> v;
  std::vector<Face> f;
  v.push_back(center + Vec3(0, 0, radius));
  for (int r = 1; r < rings; ++r) {
    const double theta = std::numbers::pi * r / rings;
    for (int s = 0; s < segments; ++s) {
      const double phi = 2.0 * std::numbers::pi * s / segments;
      v.push_back(
          center +
          radius * Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)));
    }
  }
  v.push_back(center - Vec3(0, 0, radius));
  const int south = static_cast<int>(v.size()) - 1;
  fanToPole(f, 0, 1, segments, false);
  for (int r = 0; r + 2 < rings; ++r) {
    stitchRings(f, 1 + r * segments, 1 + (r + 1) * segments, segments);
  }
  fanToPole(f, south, 1 + (rings - 2) * segments, segments, true);
  return TriMesh(std::move(v), std::move(f));
}

TriMesh makeGrid(int nx, int ny, double spacing) {
  std::vector<Vec3> v;
  std::vector<Face> f;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      v.emplace_back(i * spacing, j * spacing, 0.0);
    }
  }
  const auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return TriMesh(std::move(v), std::move(f));
}

TriMesh makeLimb(const LimbShape& shape) {
  const int n = shape.radialSegments;
  if (n < 3 || shape.axialSegments < 1 || shape.capRings < 1) {
    throw std::invalid_argument("limb needs at least 3 radial, 1 axial segment and 1 cap ring");
  }
  std::vector<Vec3> v;
  std::vector<Face> f;
  const auto addRing = [&](double x, double scale) {
    for (int k = 0; k < n; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / n;
      v.emplace_back(x, scale * shape.radiusY * std::cos(phi), scale * shape.radiusZ * std::sin(phi));
    }
  };

  std::vector<int> rings;
  v.emplace_back(-shape.capLength, 0.0, 0.0);
  // Start cap, from near the tip to just before the equator.
  for (int c = 1; c < shape.capRings; ++c) {
    const double a = 0.5 * std::numbers::pi * c / shape.capRings;
    rings.push_back(static_cast<int>(v.size()));
    addRing(-shape.capLength * std::cos(a), std::sin(a));
  }
  for (int i = 0; i <= shape.axialSegments; ++i) {
    rings.push_back(static_cast<int>(v.size()));
    addRing(shape.length * i / shape.axialSegments, 1.0);
  }
  for (int c = shape.capRings - 1; c >= 1; --c) {
    const double a = 0.5 * std::numbers::pi * c / shape.capRings;
    rings.push_back(static_cast<int>(v.size()));
    addRing(shape.length + shape.capLength * std::cos(a), std::sin(a));
  }
  v.emplace_back(shape.length + shape.capLength, 0.0, 0.0);
  const int endTip = static_cast<int>(v.size()) - 1;

  fanToPole(f, 0, rings.front(), n, true);
  for (size_t r = 0; r + 1 < rings.size(); ++r) {
    stitchRings(f, rings[r], rings[r + 1], n);
  }
  fanToPole(f, endTip, rings.back(), n, false);
  return TriMesh(std::move(v), std::move(f));
}

} // namespace kinemesh
