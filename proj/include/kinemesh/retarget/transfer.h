#pragma once

#include "kinemesh/deform/blend_skin.h"
#include "kinemesh/retarget/correspondence.h"
#include "kinemesh/skeleton/skeleton.h"
#include "kinemesh/skinning/skin_weights.h"

#include <vector>

namespace kinemesh {

struct TransferOptions {
  // Multiply root translations by target height / reference height.
  bool scaleRootTranslation = true;
};

// Copies each mapped joint's bone angle and bone scale from the reference clip; unmapped
// target bones stay at rest. The root rotation is copied and the root translation scaled.
// Throws CorrespondenceError for an invalid mapping and DimensionError when a frame does
// not match the reference skeleton.
MotionClip transferClip(
    const MotionClip& clip,
    const Skeleton& reference,
    const Skeleton& target,
    const JointCorrespondence& correspondence,
    const TransferOptions& options = {});

// transferClip followed by forward kinematics and blend skinning of the target mesh, one
// deformed mesh per frame in clip order. All frames share the target mesh, skeleton and weights.
std::vector<DeformedMesh> transferMotion(
    const MotionClip& clip,
    const Skeleton& reference,
    const Skeleton& target,
    const JointCorrespondence& correspondence,
    const TriMesh& targetMesh,
    const SkinWeights& targetWeights,
    const TransferOptions& options = {});

// Blend-skins `mesh` for every frame of a clip on `skeleton`.
std::vector<DeformedMesh> animate(
    const MotionClip& clip,
    const Skeleton& skeleton,
    const TriMesh& mesh,
    const SkinWeights& weights);

} // namespace kinemesh
