#include "kinemesh/skeleton/forward_kinematics.h"

#include <spdlog/spdlog.h>

namespace kinemesh {

MotionFrame normalizedFrame(const MotionFrame& frame) {
  MotionFrame out = frame;
  if (!frame.root.isNormalized()) {
    spdlog::warn(
        "root rotation quaternion has norm {}; normalizing", frame.root.rotation.norm());
    out.root.rotation.normalize();
  }
  return out;
}

std::vector<RigidTransform> forwardKinematics(const Skeleton& skeleton, const MotionFrame& frame) {
  frame.checkFor(skeleton.boneCount());
  normalizedFrame(frame);
  const auto chain = evaluateChain<double>(
      skeleton, std::span<const Eigen::Vector3d>(frame.angles), std::span<const double>(frame.boneScales));
  std::vector<RigidTransform> out;
  out.reserve(skeleton.boneCount());
  for (size_t b = 0; b < skeleton.boneCount(); ++b) {
    out.push_back(RigidTransform::fromMatrix(chain.rotations[b], chain.translations[b]));
  }
  return out;
}

std::vector<Eigen::Vector3d> posedJoints(const Skeleton& skeleton, const MotionFrame& frame) {
  frame.checkFor(skeleton.boneCount());
  const MotionFrame f = normalizedFrame(frame);
  const auto chain = evaluateChain<double>(
      skeleton, std::span<const Eigen::Vector3d>(f.angles), std::span<const double>(f.boneScales));
  std::vector<Eigen::Vector3d> out;
  out.reserve(chain.joints.size());
  for (const auto& p : chain.joints) {
    out.push_back(f.root.apply(p));
  }
  return out;
}

} // namespace kinemesh
