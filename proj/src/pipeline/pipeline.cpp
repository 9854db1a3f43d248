#include "kinemesh/pipeline/pipeline.h"

#include "kinemesh/common/json_file.h"
#include "kinemesh/deform/blend_skin.h"
#include "kinemesh/fit/frame_objective.h"
#include "kinemesh/fit/motion_fit.h"
#include "kinemesh/geometry/mesh_io.h"
#include "kinemesh/glc/chamfer.h"
#include "kinemesh/retarget/embed.h"
#include "kinemesh/retarget/interior_field.h"
#include "kinemesh/retarget/transfer.h"
#include "kinemesh/skeleton/serialization.h"
#include "kinemesh/skinning/gaussian_skinning.h"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include <optional>

namespace kinemesh {

namespace {

namespace fs = std::filesystem;

SkinWeights computeWeights(const TriMesh& mesh, const Skeleton& skeleton, const SkinningConfig& config) {
  if (config.method == SkinningMethod::Gaussian) {
    return gaussianSkinning(mesh, ellipsoidsFromSkeleton(skeleton, config.radiusFraction));
  }
  return heatDiffusionSkinning(mesh, skeleton, config.heat);
}

double maxRowSumError(const SkinWeights& w) {
  return (w.matrix().rowwise().sum().array() - 1.0).abs().maxCoeff();
}

nlohmann::json termsJson(const LossTerms& t) {
  return {
      {"global", t.global},
      {"local", t.local},
      {"symm", t.symmetry},
      {"lap", t.laplacian},
      {"rigid", t.rigidity},
      {"total", t.total},
  };
}

// Everything one run produces, filled stage by stage.
struct RunState {
  TriMesh canonical;
  Skeleton skeleton;
  std::optional<SkinWeights> weights;
  std::vector<TriMesh> supervision;
  std::optional<FitResult> fit;
  nlohmann::json summary;
};

void loadSupervision(const PipelineConfig& config, RunState& s) {
  if (!s.supervision.empty() || !config.supervisionDir) {
    return;
  }
  for (const auto& file : supervisionFiles(*config.supervisionDir)) {
    s.supervision.push_back(loadMesh(file));
  }
}

void runSkin(const PipelineConfig& config, const fs::path& out, RunState& s) {
  s.weights = computeWeights(s.canonical, s.skeleton, config.skinning);
  writeJsonFile(out / "weights.json", weightsToJson(*s.weights));
  s.summary["skin"] = {
      {"method", config.skinning.method == SkinningMethod::Heat ? "heat" : "gaussian"},
      {"bones", s.weights->boneCount()},
      {"max_row_sum_error", maxRowSumError(*s.weights)},
      {"min_weight", s.weights->matrix().minCoeff()},
  };
}

void runFit(const PipelineConfig& config, const fs::path& out, RunState& s) {
  loadSupervision(config, s);
  FitResult result = fitMotion(s.canonical, s.skeleton, *s.weights, s.supervision, config.fit);
  writeJsonFile(out / "clip.json", clipToJson(result.clip));
  writeJsonFile(out / "fit_report.json", fitReportToJson(result.report));
  std::vector<DeformedMesh> frames;
  for (size_t f = 0; f < result.fittedVertices.size(); ++f) {
    frames.push_back({s.canonical.withVertices(result.fittedVertices[f]), static_cast<int>(f)});
  }
  writeFrameSequence(out / "fitted", frames);

  nlohmann::json perFrame = nlohmann::json::array();
  for (const FrameReport& r : result.report.frames) {
    nlohmann::json j = termsJson(r.terms);
    j["iterations"] = r.iterations;
    j["accepted_steps"] = r.acceptedSteps;
    j["restarts"] = r.restarts;
    perFrame.push_back(std::move(j));
  }
  s.summary["fit"] = {
      {"frames", result.clip.frames.size()},
      {"per_frame", perFrame},
      {"final_total", result.report.frames.back().terms.total},
  };
  s.fit = std::move(result);
}

void runRetarget(const PipelineConfig& config, const fs::path& out, RunState& s) {
  const RetargetConfig& r = *config.retarget;
  const TriMesh targetMesh = loadMesh(r.targetMesh);
  nlohmann::json info;
  Skeleton target;
  if (r.embed) {
    const InteriorField field(targetMesh, r.resolution);
    const Embedding e = embedSkeleton(s.skeleton, field);
    target = e.skeleton;
    info["embedding_cost"] = e.cost;
    info["embedding_scale"] = e.scale;
  } else {
    target = loadSkeleton(*r.targetSkeleton);
  }
  const JointCorrespondence correspondence = r.correspondence
      ? loadCorrespondence(*r.correspondence)
      : JointCorrespondence::identity(s.skeleton.jointCount());
  const MotionClip clip = s.fit ? s.fit->clip : loadClip(*r.clip);
  const SkinWeights targetWeights = computeWeights(targetMesh, target, config.skinning);
  TransferOptions options;
  options.scaleRootTranslation = r.scaleRootTranslation;
  const MotionClip mapped = transferClip(clip, s.skeleton, target, correspondence, options);
  const auto frames = animate(mapped, target, targetMesh, targetWeights);

  const fs::path dir = out / "retarget";
  fs::create_directories(dir);
  writeJsonFile(dir / "target_skeleton.json", skeletonToJson(target));
  writeJsonFile(dir / "target_weights.json", weightsToJson(targetWeights));
  writeJsonFile(dir / "clip.json", clipToJson(mapped));
  writeFrameSequence(dir / "frames", frames);

  info["embedded"] = r.embed;
  info["frames"] = frames.size();
  info["target_vertices"] = targetMesh.vertexCount();
  info["target_bones"] = target.boneCount();
  info["height_ratio"] = target.height() / s.skeleton.height();
  s.summary["retarget"] = info;
}

void runEval(const PipelineConfig& config, RunState& s) {
  const double diagonal = bboxDiagonal(s.canonical);
  nlohmann::json perFrame = nlohmann::json::array();
  double worst = 0.0;
  for (size_t f = 0; f < s.supervision.size(); ++f) {
    const auto& fitted = s.fit->fittedVertices[f];
    const SkinWeights targetWeights = supervisionWeights(
        s.canonical,
        s.skeleton,
        *s.weights,
        s.supervision[f],
        packFrame(s.fit->clip.frames[f]),
        SupervisionWeights::Transfer);
    const double global = chamferGlobal(fitted, s.supervision[f].vertices());
    const double local = chamferLocal(
        fitted, s.supervision[f].vertices(), *s.weights, targetWeights, partDecompose(*s.weights), partDecompose(targetWeights));
    const double glc = global + config.fit.localWeight * local;
    worst = std::max(worst, glc);
    perFrame.push_back({{"global", global}, {"local", local}, {"glc", glc}});
  }
  s.summary["eval"] = {
      {"per_frame", perFrame},
      {"max_glc", worst},
      {"max_glc_relative", worst / (diagonal * diagonal)},
  };
}

void replaceWith(const fs::path& from, const fs::path& to) {
  fs::remove_all(to);
  fs::rename(from, to);
}

} // namespace

ValidationError::ValidationError(std::vector<std::string> diagnostics)
    : Error(fmt::format("asset validation failed: {}", fmt::join(diagnostics, "; "))),
      diagnostics_(std::move(diagnostics)) {}

StageError::StageError(Stage stage, const std::string& cause)
    : Error(fmt::format("stage '{}' failed: {}", stageName(stage), cause)), stage_(stage) {}

nlohmann::json runPipeline(const PipelineConfig& config) {
  auto diagnostics = validateAssets(config);
  if (!diagnostics.empty()) {
    throw ValidationError(std::move(diagnostics));
  }

  const fs::path staging = config.outputDir / ".staging";
  fs::remove_all(staging);
  fs::create_directories(staging);

  RunState s;
  s.canonical = loadMesh(config.canonicalMesh);
  s.skeleton = loadSkeleton(config.skeleton);
  if (config.weights) {
    s.weights = loadWeights(*config.weights);
  }
  nlohmann::json stages = nlohmann::json::array();
  for (const Stage stage : config.stages) {
    stages.push_back(stageName(stage));
  }
  s.summary["stages"] = stages;
  s.summary["seed"] = config.seed;
  s.summary["canonical"] = {
      {"vertices", s.canonical.vertexCount()},
      {"faces", s.canonical.faceCount()},
      {"bbox_diagonal", bboxDiagonal(s.canonical)},
  };

  for (const Stage stage : config.stages) {
    spdlog::info("pipeline stage '{}'", stageName(stage));
    try {
      switch (stage) {
        case Stage::Skin:
          runSkin(config, staging, s);
          break;
        case Stage::Fit:
          runFit(config, staging, s);
          break;
        case Stage::Retarget:
          runRetarget(config, staging, s);
          break;
        case Stage::Eval:
          runEval(config, s);
          break;
      }
    } catch (const std::exception& e) {
      const fs::path quarantine = config.outputDir / "quarantine";
      writeJsonFile(staging / "error.json", {{"stage", stageName(stage)}, {"error", e.what()}});
      replaceWith(staging, quarantine);
      spdlog::error("stage '{}' failed; partial outputs are in '{}'", stageName(stage), quarantine.string());
      throw StageError(stage, e.what());
    }
  }

  writeJsonFile(staging / "summary.json", s.summary);
  for (const auto& entry : fs::directory_iterator(staging)) {
    replaceWith(entry.path(), config.outputDir / entry.path().filename());
  }
  fs::remove(staging);
  return s.summary;
}

} // namespace kinemesh
