#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>

namespace kinemesh {

// Rodrigues map from a rotation vector (axis * angle, radians) to a rotation matrix.
// Templated so that forward-mode autodiff scalars can flow through it; the small-angle
// branch uses series expansions in theta^2 so derivatives at the identity are exact.
template <typename T>
Eigen::Matrix<T, 3, 3> rotationFromVector(const Eigen::Matrix<T, 3, 1>& v) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const T theta2 = v.squaredNorm();
  T a; // sin(theta) / theta
  T b; // (1 - cos(theta)) / theta^2
  if (theta2 < T(1e-6)) {
    a = T(1.0) - theta2 / T(6.0) + theta2 * theta2 / T(120.0);
    b = T(0.5) - theta2 / T(24.0) + theta2 * theta2 / T(720.0);
  } else {
    const T theta = sqrt(theta2);
    a = sin(theta) / theta;
    b = (T(1.0) - cos(theta)) / theta2;
  }
  Eigen::Matrix<T, 3, 3> k;
  k << T(0.0), -v.z(), v.y(), v.z(), T(0.0), -v.x(), -v.y(), v.x(), T(0.0);
  return Eigen::Matrix<T, 3, 3>::Identity() + a * k + b * (k * k);
}

// Rotation vector with angle in [0, pi].
inline Eigen::Vector3d rotationVectorFromQuaternion(const Eigen::Quaterniond& q) {
  Eigen::Quaterniond n = q.normalized();
  if (n.w() < 0.0) {
    n.coeffs() = -n.coeffs();
  }
  const double s = n.vec().norm();
  if (s < 1e-12) {
    return 2.0 * n.vec();
  }
  const double angle = 2.0 * std::atan2(s, n.w());
  return n.vec() * (angle / s);
}

inline Eigen::Quaterniond quaternionFromVector(const Eigen::Vector3d& v) {
  const double angle = v.norm();
  if (angle < 1e-12) {
    return Eigen::Quaterniond(1.0, 0.5 * v.x(), 0.5 * v.y(), 0.5 * v.z()).normalized();
  }
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, v / angle));
}

// The same rotation with its angle wrapped into [0, pi].
inline Eigen::Vector3d canonicalRotationVector(const Eigen::Vector3d& v) {
  return rotationVectorFromQuaternion(quaternionFromVector(v));
}

} // namespace kinemesh
