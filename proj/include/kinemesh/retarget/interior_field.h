#pragma once

#include "kinemesh/geometry/tri_mesh.h"

#include <array>
#include <optional>
#include <vector>

namespace kinemesh {

// Cubic voxel grid over a mesh's bounding box (plus one empty layer on every side) that
// marks interior voxels and stores their distance to the surface in model units.
class InteriorField {
 public:
  // Voxels are cubes whose edge is the longest bounding-box extent divided by
  // `resolution`. A voxel is interior when at least two of the three axis-aligned rays
  // through its center see an odd number of surface crossings on one side. Distances are
  // shortest 26-connected paths through interior voxels, starting at half a voxel for
  // interior voxels with a non-interior face neighbor.
  // Throws ResolutionError when resolution < 8 or no voxel is interior, and
  // EmptyInputError for a mesh without faces.
  InteriorField(const TriMesh& mesh, int resolution);

  const std::array<int, 3>& dims() const {
    return dims_;
  }
  const Vec3& origin() const {
    return origin_;
  }
  double voxelSize() const {
    return voxelSize_;
  }
  size_t voxelCount() const {
    return interior_.size();
  }
  size_t interiorCount() const {
    return interiorVoxels_.size();
  }
  // Linear indices of interior voxels in increasing order.
  const std::vector<int>& interiorVoxels() const {
    return interiorVoxels_;
  }
  double maxDistance() const {
    return maxDistance_;
  }

  int linear(int x, int y, int z) const {
    return (z * dims_[1] + y) * dims_[0] + x;
  }
  std::array<int, 3> coords(int index) const;
  Vec3 center(int index) const;

  bool isInterior(int index) const {
    return interior_[index] != 0;
  }
  // 0 for voxels that are not interior.
  double distance(int index) const {
    return distance_[index];
  }

  // Voxel containing `p`, if it lies inside the grid.
  std::optional<int> voxelAt(const Vec3& p) const;
  bool isInterior(const Vec3& p) const;
  double distanceAt(const Vec3& p) const;

  // Interior voxels sharing a face with `index`.
  std::vector<int> neighbors(int index) const;

 private:
  std::array<int, 3> dims_{};
  Vec3 origin_ = Vec3::Zero();
  double voxelSize_ = 0.0;
  std::vector<unsigned char> interior_;
  std::vector<double> distance_;
  std::vector<int> interiorVoxels_;
  double maxDistance_ = 0.0;
};

} // namespace kinemesh
