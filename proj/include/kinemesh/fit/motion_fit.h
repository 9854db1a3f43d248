#pragma once

#include "kinemesh/fit/fit_config.h"
#include "kinemesh/fit/frame_objective.h"
#include "kinemesh/geometry/tri_mesh.h"
#include "kinemesh/skeleton/skeleton.h"
#include "kinemesh/skinning/skin_weights.h"

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <vector>

namespace kinemesh {

struct FrameReport {
  LossTerms terms;
  // Proposed steps, accepted or rejected, over all rounds of the winning start.
  int iterations = 0;
  int acceptedSteps = 0;
  // Extra starts tried after the initial one.
  int restarts = 0;
  double wallSeconds = 0.0;
  // Objective after every accepted step of the last round, starting with the initial value.
  std::vector<double> history;
};

struct FitReport {
  std::vector<FrameReport> frames;
  double wallSeconds = 0.0;
};

struct FitResult {
  MotionClip clip;
  FitReport report;
  // Blend-skinned canonical vertices at the fitted parameters, per frame.
  std::vector<std::vector<Vec3>> fittedVertices;
};

// Outcome of minimizing one FrameObjective from `initial`.
struct FrameSolve {
  Eigen::VectorXd params;
  LossTerms terms;
  int iterations = 0;
  int acceptedSteps = 0;
  std::vector<double> history;
};

// Adam with per-parameter scaling; a step that increases the objective is rejected and
// the learning rate halved, so accepted objectives never increase. Bone scales are
// projected into config.scaleBounds after every step. Throws NumericalError naming
// `frameIndex` and the offending term if the objective becomes non-finite.
FrameSolve minimizeFrame(
    const FrameObjective& objective,
    const Eigen::VectorXd& initial,
    const FitConfig& config,
    size_t boneCount,
    int frameIndex);

// Supervision weights for `supervision` given the canonical mesh deformed by `params`.
SkinWeights supervisionWeights(
    const TriMesh& canonical,
    const Skeleton& skeleton,
    const SkinWeights& weights,
    const TriMesh& supervision,
    const Eigen::VectorXd& params,
    SupervisionWeights method);

// Fits one frame per supervision mesh, in order. When `fixedSupervisionWeights` is given it
// supplies W^ for every supervision mesh and no refresh rounds are run.
// Throws EmptyInputError for no supervision meshes or an empty one, DimensionError for
// mismatched weights, and NumericalError for a non-finite objective.
FitResult fitMotion(
    const TriMesh& canonical,
    const Skeleton& skeleton,
    const SkinWeights& weights,
    std::span<const TriMesh> supervision,
    const FitConfig& config,
    std::span<const SkinWeights> fixedSupervisionWeights = {});

nlohmann::json fitReportToJson(const FitReport& report);

} // namespace kinemesh
