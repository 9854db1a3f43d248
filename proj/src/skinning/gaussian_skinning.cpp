#include "kinemesh/skinning/gaussian_skinning.h"

#include "kinemesh/common/error.h"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <stdexcept>

namespace kinemesh {

EllipsoidBones::EllipsoidBones(
    std::vector<Eigen::Vector3d> centers,
    std::vector<Eigen::Matrix3d> orientations,
    std::vector<Eigen::Vector3d> scales)
    : centers_(std::move(centers)), orientations_(std::move(orientations)), scales_(std::move(scales)) {
  if (orientations_.size() != centers_.size() || scales_.size() != centers_.size()) {
    throw std::invalid_argument("ellipsoid centers, orientations and scales differ in length");
  }
  for (size_t b = 0; b < centers_.size(); ++b) {
    const double err = (orientations_[b] * orientations_[b].transpose() - Eigen::Matrix3d::Identity())
                           .cwiseAbs()
                           .maxCoeff();
    if (!(err <= 1e-8)) {
      throw std::invalid_argument(fmt::format("orientation of ellipsoid {} is not orthonormal", b));
    }
    if (!(scales_[b].minCoeff() > 0.0) || !scales_[b].allFinite()) {
      throw std::invalid_argument(fmt::format("ellipsoid {} needs positive scales", b));
    }
  }
}

Eigen::Matrix3d EllipsoidBones::precision(size_t bone) const {
  const auto& v = orientations_[bone];
  return v.transpose() * scales_[bone].asDiagonal() * v;
}

double EllipsoidBones::mahalanobisSquared(size_t bone, const Eigen::Vector3d& x) const {
  const Eigen::Vector3d local = orientations_[bone] * (x - centers_[bone]);
  return local.cwiseProduct(local).dot(scales_[bone]);
}

EllipsoidBones ellipsoidsFromSkeleton(const Skeleton& skeleton, double radiusFraction) {
  std::vector<Eigen::Vector3d> centers;
  std::vector<Eigen::Matrix3d> orientations;
  std::vector<Eigen::Vector3d> scales;
  for (size_t b = 0; b < skeleton.boneCount(); ++b) {
    const int j = skeleton.boneJoint(static_cast<int>(b));
    const Eigen::Vector3d head = skeleton.joints()[skeleton.parents()[j]];
    const Eigen::Vector3d bone = skeleton.joints()[j] - head;
    const double length = std::max(bone.norm(), 1e-9);
    const Eigen::Vector3d axis = bone.norm() > 0.0 ? Eigen::Vector3d(bone / length) : Eigen::Vector3d::UnitX();
    Eigen::Vector3d side = axis.unitOrthogonal();
    Eigen::Matrix3d v;
    v.row(0) = axis;
    v.row(1) = side;
    v.row(2) = axis.cross(side);
    const double along = 0.5 * length;
    const double across = radiusFraction * length;
    centers.push_back(head + 0.5 * bone);
    orientations.push_back(v);
    scales.emplace_back(1.0 / (along * along), 1.0 / (across * across), 1.0 / (across * across));
  }
  return EllipsoidBones(std::move(centers), std::move(orientations), std::move(scales));
}

SkinWeights gaussianSkinning(const TriMesh& mesh, const EllipsoidBones& bones) {
  const size_t boneCount = bones.boneCount();
  if (boneCount == 0) {
    throw DimensionError("gaussian skinning needs at least one bone");
  }
  Eigen::MatrixXd w(mesh.vertexCount(), boneCount);
  size_t fallbacks = 0;
  for (size_t n = 0; n < mesh.vertexCount(); ++n) {
    const auto& x = mesh.vertex(n);
    double sum = 0.0;
    for (size_t b = 0; b < boneCount; ++b) {
      w(n, b) = std::exp(-0.5 * bones.mahalanobisSquared(b, x));
      sum += w(n, b);
    }
    if (sum > 0.0 && std::isfinite(sum)) {
      w.row(n) /= sum;
      continue;
    }
    size_t nearest = 0;
    for (size_t b = 1; b < boneCount; ++b) {
      if ((x - bones.centers()[b]).squaredNorm() < (x - bones.centers()[nearest]).squaredNorm()) {
        nearest = b;
      }
    }
    w.row(n).setZero();
    w(n, nearest) = 1.0;
    ++fallbacks;
  }
  if (fallbacks > 0) {
    spdlog::warn(
        "gaussian skinning underflowed for {} vertices; assigned them to the nearest center",
        fallbacks);
  }
  return SkinWeights(std::move(w));
}

} // namespace kinemesh
