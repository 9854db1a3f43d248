#include "kinemesh/common/error.h"
#include "kinemesh/common/json_file.h"
#include "kinemesh/common/parallel.h"
#include "kinemesh/deform/blend_skin.h"
#include "kinemesh/fit/motion_fit.h"
#include "kinemesh/geometry/mesh_io.h"
#include "kinemesh/glc/chamfer.h"
#include "kinemesh/pipeline/pipeline.h"
#include "kinemesh/retarget/embed.h"
#include "kinemesh/retarget/interior_field.h"
#include "kinemesh/retarget/transfer.h"
#include "kinemesh/skeleton/forward_kinematics.h"
#include "kinemesh/skeleton/serialization.h"
#include "kinemesh/skinning/gaussian_skinning.h"
#include "kinemesh/skinning/heat_skinning.h"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <iostream>
#include <optional>

using namespace kinemesh;
namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

// Bad input files or arguments are validation failures; everything else is a runtime failure.
int exitCodeFor(const std::exception& e) {
  if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const TopologyError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e) || dynamic_cast<const EmptyInputError*>(&e) ||
      dynamic_cast<const SkeletonError*>(&e) || dynamic_cast<const CorrespondenceError*>(&e) ||
      dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e)) {
    return kExitValidation;
  }
  return kExitRuntime;
}

void requireFile(const fs::path& path, const char* what) {
  if (!fs::exists(path)) {
    throw FormatError(fmt::format("{} '{}' does not exist", what, path.string()));
  }
}

void printJson(const nlohmann::json& j) {
  std::cout << j.dump(2) << '\n';
}

struct SkinArgs {
  fs::path mesh;
  fs::path skeleton;
  std::string method = "heat";
  double radiusFraction = 0.25;
  fs::path out;
};

int runSkin(const SkinArgs& a) {
  requireFile(a.mesh, "mesh");
  requireFile(a.skeleton, "skeleton");
  const TriMesh mesh = loadMesh(a.mesh);
  const Skeleton skeleton = loadSkeleton(a.skeleton);
  const SkinWeights w = a.method == "gaussian"
      ? gaussianSkinning(mesh, ellipsoidsFromSkeleton(skeleton, a.radiusFraction))
      : heatDiffusionSkinning(mesh, skeleton);
  writeJsonFile(a.out, weightsToJson(w));
  return 0;
}

struct FitArgs {
  fs::path canonical;
  fs::path skeleton;
  fs::path weights;
  fs::path supervision;
  std::optional<fs::path> config;
  fs::path out;
  std::optional<fs::path> report;
  std::optional<fs::path> framesOut;
  std::optional<uint64_t> seed;
};

int runFit(const FitArgs& a) {
  requireFile(a.canonical, "canonical mesh");
  requireFile(a.skeleton, "skeleton");
  requireFile(a.weights, "weights");
  requireFile(a.supervision, "supervision directory");
  FitConfig config;
  if (a.config) {
    requireFile(*a.config, "fit config");
    config = fitConfigFromJson(readJsonFile(*a.config));
  }
  if (a.seed) {
    config.seed = *a.seed;
  }
  const TriMesh canonical = loadMesh(a.canonical);
  const Skeleton skeleton = loadSkeleton(a.skeleton);
  const SkinWeights weights = loadWeights(a.weights);
  std::vector<TriMesh> supervision;
  for (const auto& file : supervisionFiles(a.supervision)) {
    supervision.push_back(loadMesh(file));
  }
  const FitResult result = fitMotion(canonical, skeleton, weights, supervision, config);
  writeJsonFile(a.out, clipToJson(result.clip));
  fs::path report = a.report.value_or(a.out.parent_path() / (a.out.stem().string() + "_report.json"));
  writeJsonFile(report, fitReportToJson(result.report));
  if (a.framesOut) {
    std::vector<DeformedMesh> frames;
    for (size_t f = 0; f < result.fittedVertices.size(); ++f) {
      frames.push_back({canonical.withVertices(result.fittedVertices[f]), static_cast<int>(f)});
    }
    writeFrameSequence(*a.framesOut, frames);
  }
  return 0;
}

struct RetargetArgs {
  fs::path clip;
  fs::path refSkeleton;
  fs::path targetMesh;
  std::optional<fs::path> targetSkeleton;
  std::optional<fs::path> map;
  std::optional<fs::path> weights;
  fs::path out;
  bool embed = false;
  int resolution = 48;
  bool noRootScaling = false;
};

int runRetarget(const RetargetArgs& a) {
  requireFile(a.clip, "clip");
  requireFile(a.refSkeleton, "reference skeleton");
  requireFile(a.targetMesh, "target mesh");
  const MotionClip clip = loadClip(a.clip);
  const Skeleton reference = loadSkeleton(a.refSkeleton);
  const TriMesh mesh = loadMesh(a.targetMesh);
  Skeleton target;
  if (a.embed) {
    target = embedSkeleton(reference, InteriorField(mesh, a.resolution)).skeleton;
  } else {
    if (!a.targetSkeleton) {
      throw FormatError("retarget needs --target-skel unless --embed is given");
    }
    requireFile(*a.targetSkeleton, "target skeleton");
    target = loadSkeleton(*a.targetSkeleton);
  }
  JointCorrespondence correspondence = JointCorrespondence::identity(reference.jointCount());
  if (a.map) {
    requireFile(*a.map, "correspondence");
    correspondence = loadCorrespondence(*a.map);
  }
  SkinWeights weights;
  if (a.weights) {
    requireFile(*a.weights, "weights");
    weights = loadWeights(*a.weights);
  } else {
    weights = heatDiffusionSkinning(mesh, target);
  }
  TransferOptions options;
  options.scaleRootTranslation = !a.noRootScaling;
  const MotionClip mapped = transferClip(clip, reference, target, correspondence, options);
  const auto frames = animate(mapped, target, mesh, weights);
  fs::create_directories(a.out);
  writeJsonFile(a.out / "clip.json", clipToJson(mapped));
  writeJsonFile(a.out / "target_skeleton.json", skeletonToJson(target));
  writeFrameSequence(a.out, frames);
  return 0;
}

struct FkArgs {
  fs::path skeleton;
  fs::path clip;
  std::optional<fs::path> mesh;
  std::optional<fs::path> weights;
  std::optional<fs::path> out;
};

int runFk(const FkArgs& a) {
  requireFile(a.skeleton, "skeleton");
  requireFile(a.clip, "clip");
  const Skeleton skeleton = loadSkeleton(a.skeleton);
  const MotionClip clip = loadClip(a.clip);
  nlohmann::json frames = nlohmann::json::array();
  for (const MotionFrame& frame : clip.frames) {
    nlohmann::json joints = nlohmann::json::array();
    for (const auto& p : posedJoints(skeleton, frame)) {
      joints.push_back({p.x(), p.y(), p.z()});
    }
    frames.push_back({{"joints", joints}});
  }
  if (a.mesh) {
    if (!a.weights || !a.out) {
      throw FormatError("fk --mesh also needs --weights and --out");
    }
    requireFile(*a.mesh, "mesh");
    requireFile(*a.weights, "weights");
    writeFrameSequence(*a.out, animate(clip, skeleton, loadMesh(*a.mesh), loadWeights(*a.weights)));
  }
  printJson({{"frames", frames}});
  return 0;
}

struct ChamferArgs {
  fs::path pred;
  fs::path target;
  std::optional<fs::path> predWeights;
  std::optional<fs::path> targetWeights;
  double localWeight = 1.0;
};

int runEvalChamfer(const ChamferArgs& a) {
  requireFile(a.pred, "pred mesh");
  requireFile(a.target, "target mesh");
  if (a.predWeights.has_value() != a.targetWeights.has_value()) {
    throw FormatError("--weights-pred and --weights-target must be given together");
  }
  const TriMesh pred = loadMesh(a.pred);
  const TriMesh target = loadMesh(a.target);
  const double global = chamferGlobal(pred.vertices(), target.vertices());
  nlohmann::json out = {{"global", global}, {"local", nullptr}, {"combined", global}};
  if (a.predWeights) {
    requireFile(*a.predWeights, "pred weights");
    requireFile(*a.targetWeights, "target weights");
    const SkinWeights wp = loadWeights(*a.predWeights);
    const SkinWeights wt = loadWeights(*a.targetWeights);
    const double local =
        chamferLocal(pred.vertices(), target.vertices(), wp, wt, partDecompose(wp), partDecompose(wt));
    out["local"] = local;
    out["combined"] = global + a.localWeight * local;
  }
  printJson(out);
  return 0;
}

int runValidate(const fs::path& configPath) {
  requireFile(configPath, "pipeline config");
  const auto diagnostics = validateAssets(loadPipelineConfig(configPath));
  printJson({{"diagnostics", diagnostics}});
  return diagnostics.empty() ? 0 : kExitValidation;
}

int runPipelineCommand(const fs::path& configPath, const std::optional<fs::path>& output) {
  requireFile(configPath, "pipeline config");
  PipelineConfig config = loadPipelineConfig(configPath);
  if (output) {
    config.outputDir = *output;
  }
  runPipeline(config);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skeleton-driven mesh animation: skinning, motion fitting and retargeting."};
  app.require_subcommand(1);
  int threads = 0;
  std::string logLevel = "warn";
  app.add_option("--threads", threads, "Worker thread cap (default: KINEMESH_THREADS or all cores)");
  app.add_option("--log-level", logLevel, "trace, debug, info, warn, error or off");

  SkinArgs skin;
  auto* skinCmd = app.add_subcommand("skin", "Compute skinning weights for a mesh and skeleton");
  skinCmd->add_option("--mesh", skin.mesh, "Mesh .obj")->required();
  skinCmd->add_option("--skeleton", skin.skeleton, "Skeleton JSON")->required();
  skinCmd->add_option("--method", skin.method, "heat or gaussian")->check(CLI::IsMember({"heat", "gaussian"}));
  skinCmd->add_option("--radius-fraction", skin.radiusFraction, "Gaussian width across bones");
  skinCmd->add_option("--out", skin.out, "Output weights JSON")->required();

  FitArgs fit;
  auto* fitCmd = app.add_subcommand("fit", "Fit a motion clip to a supervision mesh sequence");
  fitCmd->add_option("--canonical", fit.canonical, "Canonical mesh .obj")->required();
  fitCmd->add_option("--skeleton", fit.skeleton, "Skeleton JSON")->required();
  fitCmd->add_option("--weights", fit.weights, "Skinning weights JSON")->required();
  fitCmd->add_option("--supervision", fit.supervision, "Directory of supervision .obj files")->required();
  fitCmd->add_option("--config", fit.config, "Fit config JSON");
  fitCmd->add_option("--out", fit.out, "Output clip JSON")->required();
  fitCmd->add_option("--report", fit.report, "Fit report JSON (default: <out>_report.json)");
  fitCmd->add_option("--frames-out", fit.framesOut, "Directory for the fitted meshes");
  fitCmd->add_option("--seed", fit.seed, "Overrides the config seed");

  RetargetArgs retarget;
  auto* retargetCmd = app.add_subcommand("retarget", "Transfer a clip onto another skeleton and mesh");
  retargetCmd->add_option("--clip", retarget.clip, "Reference clip JSON")->required();
  retargetCmd->add_option("--ref-skel", retarget.refSkeleton, "Reference skeleton JSON")->required();
  retargetCmd->add_option("--target-mesh", retarget.targetMesh, "Target mesh .obj")->required();
  retargetCmd->add_option("--target-skel", retarget.targetSkeleton, "Target skeleton JSON");
  retargetCmd->add_option("--map", retarget.map, "Joint correspondence JSON (default: identity)");
  retargetCmd->add_option("--weights", retarget.weights, "Target weights JSON (default: bone heat)");
  retargetCmd->add_option("--out", retarget.out, "Output directory")->required();
  retargetCmd->add_flag("--embed", retarget.embed, "Embed the reference skeleton into the target mesh");
  retargetCmd->add_option("--resolution", retarget.resolution, "Voxel resolution for --embed");
  retargetCmd->add_flag("--no-root-scaling", retarget.noRootScaling, "Keep root translations unscaled");

  FkArgs fk;
  auto* fkCmd = app.add_subcommand("fk", "Posed joint positions for every frame of a clip");
  fkCmd->add_option("--skeleton", fk.skeleton, "Skeleton JSON")->required();
  fkCmd->add_option("--clip", fk.clip, "Clip JSON")->required();
  fkCmd->add_option("--mesh", fk.mesh, "Also blend-skin this mesh");
  fkCmd->add_option("--weights", fk.weights, "Weights for --mesh");
  fkCmd->add_option("--out", fk.out, "Directory for the skinned frames");

  ChamferArgs chamfer;
  auto* chamferCmd = app.add_subcommand("eval-chamfer", "Global and local chamfer between two meshes");
  chamferCmd->add_option("--pred", chamfer.pred, "Predicted mesh .obj")->required();
  chamferCmd->add_option("--target", chamfer.target, "Target mesh .obj")->required();
  chamferCmd->add_option("--weights-pred", chamfer.predWeights, "Weights of the predicted mesh");
  chamferCmd->add_option("--weights-target", chamfer.targetWeights, "Weights of the target mesh");
  chamferCmd->add_option("--local-weight", chamfer.localWeight, "Weight of the local term in combined");

  fs::path validateConfig;
  auto* validateCmd = app.add_subcommand("validate", "Check pipeline assets and print diagnostics");
  validateCmd->add_option("--config", validateConfig, "Pipeline config JSON")->required();

  fs::path pipelineConfig;
  std::optional<fs::path> pipelineOutput;
  auto* pipelineCmd = app.add_subcommand("pipeline", "Run skin, fit, retarget and eval from a config");
  pipelineCmd->add_option("--config", pipelineConfig, "Pipeline config JSON")->required();
  pipelineCmd->add_option("--output", pipelineOutput, "Overrides output_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  spdlog::set_default_logger(spdlog::stderr_color_mt("kinemesh"));
  spdlog::set_level(spdlog::level::from_str(logLevel));
  setThreadCount(threads);

  try {
    if (*skinCmd) {
      return runSkin(skin);
    }
    if (*fitCmd) {
      return runFit(fit);
    }
    if (*retargetCmd) {
      return runRetarget(retarget);
    }
    if (*fkCmd) {
      return runFk(fk);
    }
    if (*chamferCmd) {
      return runEvalChamfer(chamfer);
    }
    if (*validateCmd) {
      return runValidate(validateConfig);
    }
    if (*pipelineCmd) {
      return runPipelineCommand(pipelineConfig, pipelineOutput);
    }
  } catch (const ValidationError& e) {
    for (const auto& d : e.diagnostics()) {
      std::cerr << "kinemesh: " << d << '\n';
    }
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "kinemesh: " << e.what() << '\n';
    return exitCodeFor(e);
  }
  return kExitValidation;
}
