#include "kinemesh/fit/fit_config.h"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

namespace kinemesh {

namespace {

void requireNonnegative(double value, const char* name) {
  if (!std::isfinite(value) || value < 0.0) {
    throw std::invalid_argument(fmt::format("{} must be a nonnegative number, got {}", name, value));
  }
}

} // namespace

void FitConfig::validate() const {
  requireNonnegative(globalWeight, "lambda_global");
  requireNonnegative(localWeight, "lambda_local");
  requireNonnegative(symmetryWeight, "lambda_symm");
  requireNonnegative(laplacianWeight, "lambda_lap");
  requireNonnegative(rigidityWeight, "lambda_rigid");
  requireNonnegative(initJitter, "init_jitter");
  requireNonnegative(restartTol, "restart_tol");
  requireNonnegative(restartSpread, "restart_spread");
  if (restarts < 0) {
    throw std::invalid_argument("restarts must be nonnegative");
  }
  if (maxIters < 1) {
    throw std::invalid_argument("max_iters must be at least 1");
  }
  if (!(stepSize > 0.0) || !std::isfinite(stepSize)) {
    throw std::invalid_argument("step_size must be positive");
  }
  if (!(initialDamping > 0.0) || !std::isfinite(initialDamping)) {
    throw std::invalid_argument("initial_damping must be positive");
  }
  requireNonnegative(convergenceTol, "convergence_tol");
  if (!(scaleBounds.min > 0.0 && scaleBounds.min <= 1.0 && scaleBounds.max >= 1.0)) {
    throw std::invalid_argument(fmt::format(
        "scale_bounds must satisfy 0 < min <= 1 <= max, got [{}, {}]", scaleBounds.min, scaleBounds.max));
  }
  if (supervisionRefreshes < 0) {
    throw std::invalid_argument("supervision_refreshes must be nonnegative");
  }
}

FitConfig fitConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("fit config must be a JSON object");
  }
  FitConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "lambda_global") {
      c.globalWeight = value.get<double>();
    } else if (key == "lambda_local") {
      c.localWeight = value.get<double>();
    } else if (key == "lambda_symm") {
      c.symmetryWeight = value.get<double>();
    } else if (key == "lambda_lap") {
      c.laplacianWeight = value.get<double>();
    } else if (key == "lambda_rigid") {
      c.rigidityWeight = value.get<double>();
    } else if (key == "symmetry_plane") {
      const auto n = value.at("normal").get<std::vector<double>>();
      if (n.size() != 3) {
        throw std::invalid_argument("symmetry_plane.normal needs 3 components");
      }
      c.symmetryPlane = SymmetryPlane(Vec3(n[0], n[1], n[2]), value.value("offset", 0.0));
    } else if (key == "optimizer") {
      const auto o = value.get<std::string>();
      if (o == "lm") {
        c.optimizer = Optimizer::LevenbergMarquardt;
      } else if (o == "adam") {
        c.optimizer = Optimizer::Adam;
      } else {
        throw std::invalid_argument(fmt::format("unknown optimizer '{}'", o));
      }
    } else if (key == "initial_damping") {
      c.initialDamping = value.get<double>();
    } else if (key == "max_iters") {
      c.maxIters = value.get<int>();
    } else if (key == "step_size") {
      c.stepSize = value.get<double>();
    } else if (key == "convergence_tol") {
      c.convergenceTol = value.get<double>();
    } else if (key == "scale_bounds") {
      const auto b = value.get<std::vector<double>>();
      if (b.size() != 2) {
        throw std::invalid_argument("scale_bounds needs [min, max]");
      }
      c.scaleBounds = {b[0], b[1]};
    } else if (key == "warm_start") {
      c.warmStart = value.get<bool>();
    } else if (key == "seed") {
      c.seed = value.get<uint64_t>();
    } else if (key == "init_jitter") {
      c.initJitter = value.get<double>();
    } else if (key == "restarts") {
      c.restarts = value.get<int>();
    } else if (key == "restart_tol") {
      c.restartTol = value.get<double>();
    } else if (key == "restart_spread") {
      c.restartSpread = value.get<double>();
    } else if (key == "supervision_weights") {
      const auto s = value.get<std::string>();
      if (s == "transfer") {
        c.supervisionWeights = SupervisionWeights::Transfer;
      } else if (s == "heat") {
        c.supervisionWeights = SupervisionWeights::Heat;
      } else {
        throw std::invalid_argument(fmt::format("unknown supervision_weights '{}'", s));
      }
    } else if (key == "surface_stage") {
      c.surfaceStage = value.get<bool>();
    } else if (key == "supervision_refreshes") {
      c.supervisionRefreshes = value.get<int>();
    } else {
      throw std::invalid_argument(fmt::format("unknown fit config key '{}'", key));
    }
  }
  c.validate();
  return c;
}

nlohmann::json fitConfigToJson(const FitConfig& c) {
  nlohmann::json j;
  j["lambda_global"] = c.globalWeight;
  j["lambda_local"] = c.localWeight;
  j["lambda_symm"] = c.symmetryWeight;
  j["lambda_lap"] = c.laplacianWeight;
  j["lambda_rigid"] = c.rigidityWeight;
  const Vec3& n = c.symmetryPlane.normal();
  j["symmetry_plane"] = {{"normal", {n.x(), n.y(), n.z()}}, {"offset", c.symmetryPlane.offset()}};
  j["optimizer"] = c.optimizer == Optimizer::Adam ? "adam" : "lm";
  j["initial_damping"] = c.initialDamping;
  j["max_iters"] = c.maxIters;
  j["step_size"] = c.stepSize;
  j["convergence_tol"] = c.convergenceTol;
  j["scale_bounds"] = {c.scaleBounds.min, c.scaleBounds.max};
  j["warm_start"] = c.warmStart;
  j["seed"] = c.seed;
  j["init_jitter"] = c.initJitter;
  j["restarts"] = c.restarts;
  j["restart_tol"] = c.restartTol;
  j["restart_spread"] = c.restartSpread;
  j["supervision_weights"] = c.supervisionWeights == SupervisionWeights::Heat ? "heat" : "transfer";
  j["surface_stage"] = c.surfaceStage;
  j["supervision_refreshes"] = c.supervisionRefreshes;
  return j;
}

} // namespace kinemesh
