#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace kinemesh {

// x -> rotation * x + translation. The rotation quaternion is expected to be unit length;
// consumers that accept external data normalize it (see forwardKinematics).
struct RigidTransform {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() {
    return {};
  }
  static RigidTransform fromRotationVector(
      const Eigen::Vector3d& rotationVector,
      const Eigen::Vector3d& translation = Eigen::Vector3d::Zero());
  static RigidTransform fromMatrix(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const {
    return rotation * x + translation;
  }
  Eigen::Vector3d operator*(const Eigen::Vector3d& x) const {
    return apply(x);
  }

  RigidTransform inverse() const;
  Eigen::Matrix3d rotationMatrix() const {
    return rotation.toRotationMatrix();
  }
  bool isNormalized(double tolerance = 1e-9) const;
};

// (a o b)(x) = a(b(x)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

} // namespace kinemesh
