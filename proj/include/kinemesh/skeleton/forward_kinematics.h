#pragma once

#include "kinemesh/skeleton/rotation.h"
#include "kinemesh/skeleton/skeleton.h"

#include <span>
#include <vector>

namespace kinemesh {

// World transforms of every bone (canonical space -> posed space, before the root
// transform) plus posed joint positions, for scalar type T.
//
// Bone b with parent joint p and joint j rotates about p:
//   R_b = R_parent(b) * exp(angles[b])
//   G_b(x) = R_b (x - J_p) + P_p
//   P_j = G_b(J_j) + (scales[b] - 1) R_b (J_j - J_p)
// so stretching a bone translates its descendants rigidly and leaves its own frame put.
// Translations are accumulated in increments that vanish exactly at the rest pose.
template <typename T>
struct PosedChain {
  using Vector = Eigen::Matrix<T, 3, 1>;
  using Matrix = Eigen::Matrix<T, 3, 3>;

  std::vector<Matrix> rotations; // per bone
  std::vector<Vector> translations; // per bone
  std::vector<Vector> joints; // per joint, root transform not applied
};

template <typename T>
PosedChain<T> evaluateChain(
    const Skeleton& skeleton,
    std::span<const Eigen::Matrix<T, 3, 1>> angles,
    std::span<const T> scales) {
  using Vector = Eigen::Matrix<T, 3, 1>;
  using Matrix = Eigen::Matrix<T, 3, 3>;
  const size_t boneCount = skeleton.boneCount();

  PosedChain<T> chain;
  chain.rotations.resize(boneCount);
  chain.translations.resize(boneCount);
  chain.joints.resize(skeleton.jointCount());

  const auto& rest = skeleton.joints();
  chain.joints[skeleton.root()] = rest[skeleton.root()].template cast<T>();
  for (const int j : skeleton.order()) {
    const int b = skeleton.jointBone(j);
    if (b < 0) {
      continue;
    }
    const int p = skeleton.parents()[j];
    const int pb = skeleton.jointBone(p);
    const Vector restParent = rest[p].template cast<T>();
    const Matrix local = rotationFromVector<T>(angles[b]);

    Matrix rotation;
    Vector translation;
    if (pb < 0) {
      rotation = local;
      translation = (Matrix::Identity() - rotation) * restParent;
    } else {
      const Matrix& parentRotation = chain.rotations[pb];
      rotation = parentRotation * local;
      const Vector parentBone = (rest[p] - rest[skeleton.parents()[p]]).template cast<T>();
      translation = chain.translations[pb] + (parentRotation - rotation) * restParent +
          (scales[pb] - T(1.0)) * (parentRotation * parentBone);
    }
    chain.rotations[b] = rotation;
    chain.translations[b] = translation;

    const Vector restJoint = rest[j].template cast<T>();
    chain.joints[j] = rotation * restJoint + translation +
        (scales[b] - T(1.0)) * (rotation * (restJoint - restParent));
  }
  return chain;
}

// Per-bone transforms tau_b (b = 0..B-1) mapping canonical space to posed space, without
// the root transform. Throws DimensionError if the frame does not match the skeleton. A
// non-unit root quaternion is normalized with a warning.
std::vector<RigidTransform> forwardKinematics(const Skeleton& skeleton, const MotionFrame& frame);

// World joint positions: root transform applied after forward kinematics.
std::vector<Eigen::Vector3d> posedJoints(const Skeleton& skeleton, const MotionFrame& frame);

// Copy of `frame` whose root rotation is unit length; warns if it had to normalize.
MotionFrame normalizedFrame(const MotionFrame& frame);

} // namespace kinemesh
