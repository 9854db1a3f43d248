#include "kinemesh/fit/synthetic.h"

#include "kinemesh/skinning/heat_skinning.h"

#include <cmath>
#include <numbers>
#include <random>

namespace kinemesh {

Rig makeLimbRig(int boneCount, const LimbShape& shape) {
  std::vector<Eigen::Vector3d> joints;
  std::vector<int> parents;
  for (int j = 0; j <= boneCount; ++j) {
    joints.emplace_back(shape.length * j / boneCount, 0.0, 0.0);
    parents.push_back(j - 1);
  }
  Rig rig{makeLimb(shape), Skeleton(std::move(joints), std::move(parents)), {}};
  rig.weights = heatDiffusionSkinning(rig.mesh, rig.skeleton);
  return rig;
}

Rig makeCapsuleRig() {
  LimbShape shape;
  shape.length = 2.0;
  shape.radiusY = 0.3;
  shape.radiusZ = 0.3;
  shape.capLength = 0.3;
  shape.axialSegments = 40;
  shape.radialSegments = 16;
  return makeLimbRig(2, shape);
}

MotionClip randomClip(
    size_t boneCount,
    size_t frameCount,
    uint64_t seed,
    double maxAngle,
    double minScale,
    double maxScale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-maxAngle, maxAngle);
  std::uniform_real_distribution<double> scale(minScale, maxScale);
  MotionClip clip;
  for (size_t f = 0; f < frameCount; ++f) {
    MotionFrame frame = MotionFrame::rest(boneCount);
    for (size_t b = 0; b < boneCount; ++b) {
      frame.angles[b] = Eigen::Vector3d(angle(rng), angle(rng), angle(rng));
      frame.boneScales[b] = minScale == maxScale ? minScale : scale(rng);
    }
    clip.frames.push_back(std::move(frame));
  }
  return clip;
}

MotionClip smoothClip(size_t boneCount, size_t frameCount, uint64_t seed, double maxAngle) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<double> phases(4 * boneCount);
  for (double& p : phases) {
    p = phase(rng);
  }
  MotionClip clip;
  clip.fps = 30.0;
  for (size_t f = 0; f < frameCount; ++f) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(f) / 40.0;
    MotionFrame frame = MotionFrame::rest(boneCount);
    for (size_t b = 0; b < boneCount; ++b) {
      for (int k = 0; k < 3; ++k) {
        frame.angles[b](k) = maxAngle * std::sin(t + phases[3 * b + k]);
      }
      frame.boneScales[b] = 1.0 + 0.05 * std::sin(t + phases[3 * boneCount + b]);
    }
    frame.root.translation = Eigen::Vector3d(0.0, 0.02 * static_cast<double>(f), 0.0);
    clip.frames.push_back(std::move(frame));
  }
  return clip;
}

} // namespace kinemesh
