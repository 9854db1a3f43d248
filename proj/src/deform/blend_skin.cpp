#include "kinemesh/deform/blend_skin.h"

#include "kinemesh/common/error.h"
#include "kinemesh/geometry/mesh_io.h"

#include <fmt/format.h>

namespace kinemesh {

std::vector<Vec3> blendSkinVertices(
    std::span<const Vec3> canonical,
    const Eigen::MatrixXd& weights,
    const Eigen::Matrix3d& rootRotation,
    const Vec3& rootTranslation,
    std::span<const Eigen::Matrix3d> boneRotations,
    std::span<const Vec3> boneTranslations) {
  const auto n = static_cast<Eigen::Index>(canonical.size());
  const auto bones = static_cast<Eigen::Index>(boneRotations.size());
  if (weights.rows() != n || weights.cols() != bones ||
      boneTranslations.size() != boneRotations.size()) {
    throw DimensionError(fmt::format(
        "weights are {}x{} but there are {} vertices and {} bone transforms",
        weights.rows(),
        weights.cols(),
        n,
        bones));
  }
  std::vector<Eigen::Matrix3d> offsets(boneRotations.size());
  for (size_t b = 0; b < boneRotations.size(); ++b) {
    offsets[b] = boneRotations[b] - Eigen::Matrix3d::Identity();
  }

  std::vector<Vec3> out(canonical.size());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Matrix3d blendedOffset = Eigen::Matrix3d::Zero();
    Vec3 blendedTranslation = Vec3::Zero();
    for (Eigen::Index b = 0; b < bones; ++b) {
      const double w = weights(i, b);
      if (w != 0.0) {
        blendedOffset += w * offsets[b];
        blendedTranslation += w * boneTranslations[b];
      }
    }
    const Vec3& x = canonical[i];
    out[i] = rootRotation * (x + blendedOffset * x + blendedTranslation) + rootTranslation;
  }
  return out;
}

DeformedMesh blendSkin(
    const TriMesh& canonical,
    const SkinWeights& weights,
    const RigidTransform& root,
    std::span<const RigidTransform> boneTransforms,
    int frameIndex) {
  std::vector<Eigen::Matrix3d> rotations;
  std::vector<Vec3> translations;
  rotations.reserve(boneTransforms.size());
  translations.reserve(boneTransforms.size());
  for (const auto& t : boneTransforms) {
    rotations.push_back(t.rotationMatrix());
    translations.push_back(t.translation);
  }
  auto vertices = blendSkinVertices(
      canonical.vertices(),
      weights.matrix(),
      root.rotationMatrix(),
      root.translation,
      rotations,
      translations);
  return DeformedMesh{canonical.withVertices(std::move(vertices)), frameIndex};
}

std::vector<std::filesystem::path> writeFrameSequence(
    const std::filesystem::path& directory,
    std::span<const DeformedMesh> frames) {
  std::filesystem::create_directories(directory);
  std::vector<std::filesystem::path> paths;
  paths.reserve(frames.size());
  for (size_t t = 0; t < frames.size(); ++t) {
    auto path = directory / fmt::format("frame_{:04d}.obj", t);
    saveMesh(path, frames[t].mesh);
    paths.push_back(std::move(path));
  }
  return paths;
}

} // namespace kinemesh
