#include "kinemesh/retarget/transfer.h"

#include "kinemesh/common/error.h"
#include "kinemesh/skeleton/forward_kinematics.h"

#include <fmt/format.h>

#include <optional>

namespace kinemesh {

MotionClip transferClip(
    const MotionClip& clip,
    const Skeleton& reference,
    const Skeleton& target,
    const JointCorrespondence& correspondence,
    const TransferOptions& options) {
  correspondence.validate(reference, target);
  const double ratio = options.scaleRootTranslation ? target.height() / reference.height() : 1.0;
  if (!std::isfinite(ratio)) {
    throw DimensionError("reference skeleton has zero height; cannot scale the root trajectory");
  }
  const std::vector<int> source = correspondence.referenceForTarget(target.jointCount());

  MotionClip out;
  out.fps = clip.fps;
  out.frames.reserve(clip.frames.size());
  for (const MotionFrame& frame : clip.frames) {
    frame.checkFor(reference.boneCount());
    MotionFrame mapped = MotionFrame::rest(target.boneCount());
    mapped.root.rotation = frame.root.rotation;
    mapped.root.translation = ratio * frame.root.translation;
    for (size_t t = 0; t < target.jointCount(); ++t) {
      const int targetBone = target.jointBone(static_cast<int>(t));
      if (targetBone < 0 || source[t] < 0) {
        continue;
      }
      const int referenceBone = reference.jointBone(source[t]);
      mapped.angles[targetBone] = frame.angles[referenceBone];
      mapped.boneScales[targetBone] = frame.boneScales[referenceBone];
    }
    out.frames.push_back(std::move(mapped));
  }
  return out;
}

std::vector<DeformedMesh> animate(
    const MotionClip& clip,
    const Skeleton& skeleton,
    const TriMesh& mesh,
    const SkinWeights& weights) {
  if (weights.vertexCount() != mesh.vertexCount() || weights.boneCount() != skeleton.boneCount()) {
    throw DimensionError(fmt::format(
        "weights are {}x{} but the mesh has {} vertices and the skeleton {} bones",
        weights.vertexCount(),
        weights.boneCount(),
        mesh.vertexCount(),
        skeleton.boneCount()));
  }
  std::vector<DeformedMesh> out;
  out.reserve(clip.frames.size());
  for (size_t f = 0; f < clip.frames.size(); ++f) {
    const MotionFrame frame = normalizedFrame(clip.frames[f]);
    const auto bones = forwardKinematics(skeleton, frame);
    out.push_back(blendSkin(mesh, weights, frame.root, bones, static_cast<int>(f)));
  }
  return out;
}

std::vector<DeformedMesh> transferMotion(
    const MotionClip& clip,
    const Skeleton& reference,
    const Skeleton& target,
    const JointCorrespondence& correspondence,
    const TriMesh& targetMesh,
    const SkinWeights& targetWeights,
    const TransferOptions& options) {
  const MotionClip mapped = transferClip(clip, reference, target, correspondence, options);
  return animate(mapped, target, targetMesh, targetWeights);
}

} // namespace kinemesh
