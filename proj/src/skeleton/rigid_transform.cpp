#include "kinemesh/skeleton/rigid_transform.h"

#include "kinemesh/skeleton/rotation.h"

#include <cmath>

namespace kinemesh {

RigidTransform RigidTransform::fromRotationVector(
    const Eigen::Vector3d& rotationVector,
    const Eigen::Vector3d& translation) {
  return {quaternionFromVector(rotationVector), translation};
}

RigidTransform RigidTransform::fromMatrix(
    const Eigen::Matrix3d& rotation,
    const Eigen::Vector3d& translation) {
  return {Eigen::Quaterniond(rotation).normalized(), translation};
}

RigidTransform RigidTransform::inverse() const {
  const Eigen::Quaterniond inv = rotation.conjugate();
  return {inv, -(inv * translation)};
}

bool RigidTransform::isNormalized(double tolerance) const {
  return std::abs(rotation.norm() - 1.0) <= tolerance;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

} // namespace kinemesh
