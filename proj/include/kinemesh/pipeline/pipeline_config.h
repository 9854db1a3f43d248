#pragma once

#include "kinemesh/fit/fit_config.h"
#include "kinemesh/skinning/heat_skinning.h"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kinemesh {

enum class Stage { Skin, Fit, Retarget, Eval };

std::string stageName(Stage stage);

enum class SkinningMethod { Heat, Gaussian };

struct SkinningConfig {
  SkinningMethod method = SkinningMethod::Heat;
  // Gaussian ellipsoid width across the bone, as a fraction of the bone length.
  double radiusFraction = 0.25;
  HeatSkinningOptions heat;
};

struct RetargetConfig {
  std::filesystem::path targetMesh;
  // Required unless `embed` is set.
  std::optional<std::filesystem::path> targetSkeleton;
  // Identity when absent; then both skeletons must have the same joint count.
  std::optional<std::filesystem::path> correspondence;
  // Clip to transfer when the fit stage does not run.
  std::optional<std::filesystem::path> clip;
  bool embed = false;
  int resolution = 48;
  bool scaleRootTranslation = true;
};

struct PipelineConfig {
  std::filesystem::path canonicalMesh;
  std::filesystem::path skeleton;
  // Precomputed canonical weights; the skin stage computes them otherwise.
  std::optional<std::filesystem::path> weights;
  // Directory of .obj supervision meshes, taken in file-name order.
  std::optional<std::filesystem::path> supervisionDir;
  // Run in this order, a subsequence of skin, fit, retarget, eval.
  std::vector<Stage> stages;
  SkinningConfig skinning;
  FitConfig fit;
  std::optional<RetargetConfig> retarget;
  std::filesystem::path outputDir;
  // Copied into fit.seed.
  uint64_t seed = 0;
};

// Relative paths are resolved against `baseDir`. When "stages" is absent the stages are
// skin (unless weights are given), fit, retarget (when configured) and eval.
// Throws FormatError on unknown keys, wrong types or stages out of order, and
// std::invalid_argument from the fit config.
PipelineConfig pipelineConfigFromJson(const nlohmann::json& j, const std::filesystem::path& baseDir);
PipelineConfig loadPipelineConfig(const std::filesystem::path& path);
nlohmann::json pipelineConfigToJson(const PipelineConfig& config);

} // namespace kinemesh
