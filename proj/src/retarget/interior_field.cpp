#include "kinemesh/retarget/interior_field.h"

#include "kinemesh/common/error.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>

namespace kinemesh {

namespace {

// Sub-voxel offsets of the ray origins so that rays do not pass exactly through mesh
// edges or vertices lying on voxel-center lines.
constexpr double kRayOffsetU = 0.7548776662466927e-7;
constexpr double kRayOffsetV = 0.5698402909980532e-7;

} // namespace

InteriorField::InteriorField(const TriMesh& mesh, int resolution) {
  if (resolution < 8) {
    throw ResolutionError(fmt::format("interior field resolution must be at least 8, got {}", resolution));
  }
  if (mesh.faceCount() == 0) {
    throw EmptyInputError("interior field needs a mesh with faces");
  }
  const BoundingBox box = boundingBox(mesh.vertices());
  const Vec3 extent = box.extent();
  voxelSize_ = extent.maxCoeff() / resolution;
  if (!(voxelSize_ > 0.0)) {
    throw ResolutionError("mesh has zero extent");
  }
  for (int a = 0; a < 3; ++a) {
    const int cells = std::max(1, static_cast<int>(std::ceil(extent(a) / voxelSize_ - 1e-9)));
    dims_[a] = cells + 2;
    origin_(a) = box.center()(a) - 0.5 * dims_[a] * voxelSize_;
  }
  const size_t total = static_cast<size_t>(dims_[0]) * dims_[1] * dims_[2];
  std::vector<unsigned char> votes(total, 0);

  const auto& vertices = mesh.vertices();
  for (int a = 0; a < 3; ++a) {
    const int u = (a + 1) % 3;
    const int v = (a + 2) % 3;
    const double offsetU = kRayOffsetU * voxelSize_;
    const double offsetV = kRayOffsetV * voxelSize_;
    std::vector<std::vector<double>> hits(static_cast<size_t>(dims_[u]) * dims_[v]);
    for (const Face& f : mesh.faces()) {
      const Vec3& p0 = vertices[f[0]];
      const Vec3& p1 = vertices[f[1]];
      const Vec3& p2 = vertices[f[2]];
      const double area = (p1(u) - p0(u)) * (p2(v) - p0(v)) - (p2(u) - p0(u)) * (p1(v) - p0(v));
      if (area == 0.0) {
        continue;
      }
      const double minU = std::min({p0(u), p1(u), p2(u)});
      const double maxU = std::max({p0(u), p1(u), p2(u)});
      const double minV = std::min({p0(v), p1(v), p2(v)});
      const double maxV = std::max({p0(v), p1(v), p2(v)});
      const int iu0 = std::max(0, static_cast<int>(std::floor((minU - origin_(u)) / voxelSize_ - 0.5)));
      const int iu1 = std::min(dims_[u] - 1, static_cast<int>(std::ceil((maxU - origin_(u)) / voxelSize_ - 0.5)));
      const int iv0 = std::max(0, static_cast<int>(std::floor((minV - origin_(v)) / voxelSize_ - 0.5)));
      const int iv1 = std::min(dims_[v] - 1, static_cast<int>(std::ceil((maxV - origin_(v)) / voxelSize_ - 0.5)));
      for (int iv = iv0; iv <= iv1; ++iv) {
        const double qv = origin_(v) + (iv + 0.5) * voxelSize_ + offsetV;
        for (int iu = iu0; iu <= iu1; ++iu) {
          const double qu = origin_(u) + (iu + 0.5) * voxelSize_ + offsetU;
          const double w0 = (p1(u) - qu) * (p2(v) - qv) - (p2(u) - qu) * (p1(v) - qv);
          const double w1 = (p2(u) - qu) * (p0(v) - qv) - (p0(u) - qu) * (p2(v) - qv);
          const double w2 = area - w0 - w1;
          const bool inside = area > 0.0 ? (w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0)
                                         : (w0 <= 0.0 && w1 <= 0.0 && w2 <= 0.0);
          if (inside) {
            hits[static_cast<size_t>(iv) * dims_[u] + iu].push_back((w0 * p0(a) + w1 * p1(a) + w2 * p2(a)) / area);
          }
        }
      }
    }
    for (int iv = 0; iv < dims_[v]; ++iv) {
      for (int iu = 0; iu < dims_[u]; ++iu) {
        auto& column = hits[static_cast<size_t>(iv) * dims_[u] + iu];
        if (column.empty()) {
          continue;
        }
        std::sort(column.begin(), column.end());
        size_t below = 0;
        for (int ia = 0; ia < dims_[a]; ++ia) {
          const double c = origin_(a) + (ia + 0.5) * voxelSize_;
          while (below < column.size() && column[below] < c) {
            ++below;
          }
          if (below % 2 == 1) {
            std::array<int, 3> xyz{};
            xyz[a] = ia;
            xyz[u] = iu;
            xyz[v] = iv;
            ++votes[linear(xyz[0], xyz[1], xyz[2])];
          }
        }
      }
    }
  }

  interior_.assign(total, 0);
  for (size_t i = 0; i < total; ++i) {
    if (votes[i] >= 2) {
      interior_[i] = 1;
      interiorVoxels_.push_back(static_cast<int>(i));
    }
  }
  if (interiorVoxels_.empty()) {
    throw ResolutionError(fmt::format(
        "no interior voxels at resolution {}; the mesh is open or too thin for this resolution", resolution));
  }

  distance_.assign(total, 0.0);
  std::vector<double> best(total, std::numeric_limits<double>::infinity());
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (const int i : interiorVoxels_) {
    if (neighbors(i).size() < 6) {
      best[i] = 0.5 * voxelSize_;
      queue.emplace(best[i], i);
    }
  }
  while (!queue.empty()) {
    const auto [d, i] = queue.top();
    queue.pop();
    if (d > best[i]) {
      continue;
    }
    const auto c = coords(i);
    for (int dz = -1; dz <= 1; ++dz) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0) {
            continue;
          }
          const int x = c[0] + dx;
          const int y = c[1] + dy;
          const int z = c[2] + dz;
          if (x < 0 || y < 0 || z < 0 || x >= dims_[0] || y >= dims_[1] || z >= dims_[2]) {
            continue;
          }
          const int n = linear(x, y, z);
          if (!interior_[n]) {
            continue;
          }
          const double candidate = d + voxelSize_ * std::sqrt(static_cast<double>(dx * dx + dy * dy + dz * dz));
          if (candidate < best[n]) {
            best[n] = candidate;
            queue.emplace(candidate, n);
          }
        }
      }
    }
  }
  for (const int i : interiorVoxels_) {
    distance_[i] = best[i];
    maxDistance_ = std::max(maxDistance_, best[i]);
  }
}

std::array<int, 3> InteriorField::coords(int index) const {
  const int x = index % dims_[0];
  const int rest = index / dims_[0];
  return {x, rest % dims_[1], rest / dims_[1]};
}

Vec3 InteriorField::center(int index) const {
  const auto c = coords(index);
  return origin_ + voxelSize_ * Vec3(c[0] + 0.5, c[1] + 0.5, c[2] + 0.5);
}

std::optional<int> InteriorField::voxelAt(const Vec3& p) const {
  std::array<int, 3> c{};
  for (int a = 0; a < 3; ++a) {
    const double t = std::floor((p(a) - origin_(a)) / voxelSize_);
    if (!(t >= 0.0 && t < dims_[a])) {
      return std::nullopt;
    }
    c[a] = static_cast<int>(t);
  }
  return linear(c[0], c[1], c[2]);
}

bool InteriorField::isInterior(const Vec3& p) const {
  const auto v = voxelAt(p);
  return v && interior_[*v];
}

double InteriorField::distanceAt(const Vec3& p) const {
  const auto v = voxelAt(p);
  return v ? distance_[*v] : 0.0;
}

std::vector<int> InteriorField::neighbors(int index) const {
  std::vector<int> out;
  const auto c = coords(index);
  for (int a = 0; a < 3; ++a) {
    for (const int step : {-1, 1}) {
      auto n = c;
      n[a] += step;
      if (n[a] < 0 || n[a] >= dims_[a]) {
        continue;
      }
      const int i = linear(n[0], n[1], n[2]);
      if (interior_[i]) {
        out.push_back(i);
      }
    }
  }
  return out;
}

} // namespace kinemesh
