#pragma once

#include "kinemesh/geometry/primitives.h"
#include "kinemesh/skeleton/skeleton.h"
#include "kinemesh/skinning/skin_weights.h"

#include <cstdint>

namespace kinemesh {

// A limb mesh with a straight chain skeleton along its axis and bone-heat weights.
struct Rig {
  TriMesh mesh;
  Skeleton skeleton;
  SkinWeights weights;
};

// Chain of `boneCount` equal bones from x = 0 to x = shape.length inside makeLimb(shape).
Rig makeLimbRig(int boneCount = 3, const LimbShape& shape = {});

// Round two-bone capsule of length 2 and radius 0.3.
Rig makeCapsuleRig();

// Frames with per-axis angles uniform in [-maxAngle, maxAngle], scales uniform in
// [minScale, maxScale] and identity root, drawn independently per frame.
MotionClip randomClip(
    size_t boneCount,
    size_t frameCount,
    uint64_t seed,
    double maxAngle,
    double minScale = 1.0,
    double maxScale = 1.0);

// Smooth periodic motion: every angle and scale follows a sinusoid with a random phase, and
// the root translates slowly along +y. Frame 0 is not the rest pose in general.
MotionClip smoothClip(size_t boneCount, size_t frameCount, uint64_t seed, double maxAngle);

} // namespace kinemesh
