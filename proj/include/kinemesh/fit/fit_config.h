#pragma once

#include "kinemesh/geometry/symmetry.h"
#include "kinemesh/skeleton/skeleton.h"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>

namespace kinemesh {

// How the supervision weights W^ used by the local chamfer term are obtained.
enum class SupervisionWeights {
  // Each supervision vertex copies the weights of its nearest fitted vertex.
  Transfer,
  // Bone-heat skinning of the supervision mesh against the skeleton in the fitted pose.
  // Needs supervision meshes with faces.
  Heat,
};

enum class Optimizer {
  // Damped Gauss-Newton on the frozen-correspondence least-squares objective.
  LevenbergMarquardt,
  // First-order with per-parameter adaptive steps.
  Adam,
};

struct FitConfig {
  double globalWeight = 1.0;
  double localWeight = 1.0;
  double symmetryWeight = 0.0;
  double laplacianWeight = 0.0;
  double rigidityWeight = 1.0;
  SymmetryPlane symmetryPlane;

  Optimizer optimizer = Optimizer::LevenbergMarquardt;
  int maxIters = 400;
  // Adam learning rate, in units of each parameter's scale.
  double stepSize = 0.05;
  // Initial Levenberg-Marquardt damping relative to the Hessian diagonal.
  double initialDamping = 1e-3;
  // Stop once accepted steps stop reducing the loss by more than this fraction.
  double convergenceTol = 1e-7;
  ScaleBounds scaleBounds;
  bool warmStart = true;

  uint64_t seed = 0;
  // Standard deviation (radians) of Gaussian noise added to the initial angles.
  double initJitter = 0.0;

  // A frame whose weighted chamfer terms stay above restartTol times the squared
  // bounding-box diagonal is solved again from the rest pose and then from up to `restarts` random poses with angles
  // uniform in [-restartSpread, restartSpread] radians. The lowest loss wins.
  int restarts = 6;
  double restartTol = 1e-8;
  double restartSpread = 0.5;

  // Before fitting the vertex-set chamfer, fit its surface form when both meshes have
  // triangles. This keeps matching from locking onto the vertex sampling.
  bool surfaceStage = true;

  SupervisionWeights supervisionWeights = SupervisionWeights::Transfer;
  // Extra fit rounds per frame after recomputing W^ from the fitted pose.
  int supervisionRefreshes = 1;

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

// Missing keys keep their defaults; unknown keys are rejected.
FitConfig fitConfigFromJson(const nlohmann::json& j);
nlohmann::json fitConfigToJson(const FitConfig& config);

} // namespace kinemesh
