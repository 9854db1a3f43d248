#pragma once

#include "kinemesh/geometry/tri_mesh.h"
#include "kinemesh/skeleton/skeleton.h"
#include "kinemesh/skinning/skin_weights.h"

#include <Eigen/Core>

#include <vector>

namespace kinemesh {

// Mixture of B Gaussian ellipsoids. Bone b has center C_b, orthonormal orientation V_b and
// diagonal precision scales Lambda_b, giving the precision matrix Q_b = V_b^T Lambda_b V_b.
class EllipsoidBones {
 public:
  // Throws std::invalid_argument on size mismatches, non-orthonormal orientations
  // (tolerance 1e-8) or non-positive scales.
  EllipsoidBones(
      std::vector<Eigen::Vector3d> centers,
      std::vector<Eigen::Matrix3d> orientations,
      std::vector<Eigen::Vector3d> scales);

  size_t boneCount() const {
    return centers_.size();
  }
  const std::vector<Eigen::Vector3d>& centers() const {
    return centers_;
  }
  const std::vector<Eigen::Matrix3d>& orientations() const {
    return orientations_;
  }
  const std::vector<Eigen::Vector3d>& scales() const {
    return scales_;
  }
  Eigen::Matrix3d precision(size_t bone) const;

  // (x - C_b)^T Q_b (x - C_b)
  double mahalanobisSquared(size_t bone, const Eigen::Vector3d& x) const;

 private:
  std::vector<Eigen::Vector3d> centers_;
  std::vector<Eigen::Matrix3d> orientations_;
  std::vector<Eigen::Vector3d> scales_;
};

// One ellipsoid per bone, centred at the bone midpoint with its first axis along the bone.
// Standard deviations are half the bone length along the bone and `radiusFraction` times
// the length across it.
EllipsoidBones ellipsoidsFromSkeleton(const Skeleton& skeleton, double radiusFraction = 0.25);

// W[n,b] proportional to exp(-0.5 (X_n - C_b)^T Q_b (X_n - C_b)), rows normalized to 1.
// A row that underflows to zero falls back to the nearest center (one-hot) with a warning.
SkinWeights gaussianSkinning(const TriMesh& mesh, const EllipsoidBones& bones);

} // namespace kinemesh
