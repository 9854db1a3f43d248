#pragma once

#include "kinemesh/geometry/tri_mesh.h"
#include "kinemesh/skeleton/rigid_transform.h"
#include "kinemesh/skinning/skin_weights.h"

#include <Eigen/Core>

#include <filesystem>
#include <span>
#include <vector>

namespace kinemesh {

// Posed copy of a canonical mesh for frame `frameIndex`; shares the canonical connectivity.
struct DeformedMesh {
  TriMesh mesh;
  int frameIndex = 0;

  const std::vector<Vec3>& vertices() const {
    return mesh.vertices();
  }
  bool sameBase(const DeformedMesh& other) const {
    return mesh.sharesTopologyWith(other.mesh);
  }
};

// Linear blend skinning with matrix blending:
//   X_n = R0 (X0_n + sum_b W_nb ((R_b - I) X0_n + t_b)) + t0,
// which equals R0 (sum_b W_nb (R_b X0_n + t_b)) + t0 for row-stochastic W and reproduces
// X0 exactly when every transform is the identity.
std::vector<Vec3> blendSkinVertices(
    std::span<const Vec3> canonical,
    const Eigen::MatrixXd& weights,
    const Eigen::Matrix3d& rootRotation,
    const Vec3& rootTranslation,
    std::span<const Eigen::Matrix3d> boneRotations,
    std::span<const Vec3> boneTranslations);

// Throws DimensionError if the weights do not have one row per vertex and one column per
// bone transform.
DeformedMesh blendSkin(
    const TriMesh& canonical,
    const SkinWeights& weights,
    const RigidTransform& root,
    std::span<const RigidTransform> boneTransforms,
    int frameIndex = 0);

// Writes frame_0000.obj, frame_0001.obj, ... into `directory` (created if missing), in
// sequence order. Returns the written paths.
std::vector<std::filesystem::path> writeFrameSequence(
    const std::filesystem::path& directory,
    std::span<const DeformedMesh> frames);

} // namespace kinemesh
