#include "kinemesh/pipeline/pipeline_config.h"

#include "kinemesh/common/error.h"
#include "kinemesh/common/json_file.h"

#include <fmt/format.h>

#include <set>

namespace kinemesh {

namespace {

namespace fs = std::filesystem;

fs::path resolve(const nlohmann::json& value, const fs::path& baseDir) {
  const fs::path p(value.get<std::string>());
  return p.is_absolute() ? p : baseDir / p;
}

Stage parseStage(const std::string& name) {
  if (name == "skin") {
    return Stage::Skin;
  }
  if (name == "fit") {
    return Stage::Fit;
  }
  if (name == "retarget") {
    return Stage::Retarget;
  }
  if (name == "eval") {
    return Stage::Eval;
  }
  throw FormatError(fmt::format("unknown pipeline stage '{}'", name));
}

void rejectUnknown(const nlohmann::json& j, const std::set<std::string>& known, const char* where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw FormatError(fmt::format("unknown key '{}' in {}", key, where));
    }
  }
}

SkinningConfig skinningFromJson(const nlohmann::json& j) {
  rejectUnknown(j, {"method", "radius_fraction", "heat_coefficient"}, "skinning");
  SkinningConfig s;
  const std::string method = j.value("method", "heat");
  if (method == "heat") {
    s.method = SkinningMethod::Heat;
  } else if (method == "gaussian") {
    s.method = SkinningMethod::Gaussian;
  } else {
    throw FormatError(fmt::format("unknown skinning method '{}'", method));
  }
  s.radiusFraction = j.value("radius_fraction", s.radiusFraction);
  s.heat.heatCoefficient = j.value("heat_coefficient", s.heat.heatCoefficient);
  if (!(s.radiusFraction > 0.0) || !(s.heat.heatCoefficient > 0.0)) {
    throw FormatError("skinning radius_fraction and heat_coefficient must be positive");
  }
  return s;
}

RetargetConfig retargetFromJson(const nlohmann::json& j, const fs::path& baseDir) {
  rejectUnknown(
      j,
      {"target_mesh", "target_skeleton", "correspondence", "clip", "embed", "resolution", "scale_root_translation"},
      "retarget");
  RetargetConfig r;
  r.targetMesh = resolve(j.at("target_mesh"), baseDir);
  if (j.contains("target_skeleton")) {
    r.targetSkeleton = resolve(j["target_skeleton"], baseDir);
  }
  if (j.contains("correspondence")) {
    r.correspondence = resolve(j["correspondence"], baseDir);
  }
  if (j.contains("clip")) {
    r.clip = resolve(j["clip"], baseDir);
  }
  r.embed = j.value("embed", false);
  r.resolution = j.value("resolution", r.resolution);
  r.scaleRootTranslation = j.value("scale_root_translation", true);
  return r;
}

} // namespace

std::string stageName(Stage stage) {
  switch (stage) {
    case Stage::Skin:
      return "skin";
    case Stage::Fit:
      return "fit";
    case Stage::Retarget:
      return "retarget";
    case Stage::Eval:
      return "eval";
  }
  return "unknown";
}

PipelineConfig pipelineConfigFromJson(const nlohmann::json& j, const fs::path& baseDir) {
  if (!j.is_object()) {
    throw FormatError("pipeline config must be a JSON object");
  }
  rejectUnknown(
      j,
      {"canonical_mesh",
       "skeleton",
       "weights",
       "supervision_dir",
       "stages",
       "skinning",
       "fit",
       "retarget",
       "output_dir",
       "seed"},
      "pipeline config");
  PipelineConfig c;
  try {
    c.canonicalMesh = resolve(j.at("canonical_mesh"), baseDir);
    c.skeleton = resolve(j.at("skeleton"), baseDir);
    if (j.contains("weights")) {
      c.weights = resolve(j["weights"], baseDir);
    }
    if (j.contains("supervision_dir")) {
      c.supervisionDir = resolve(j["supervision_dir"], baseDir);
    }
    if (j.contains("skinning")) {
      c.skinning = skinningFromJson(j["skinning"]);
    }
    if (j.contains("fit")) {
      c.fit = fitConfigFromJson(j["fit"]);
    }
    if (j.contains("retarget")) {
      c.retarget = retargetFromJson(j["retarget"], baseDir);
    }
    c.outputDir = resolve(j.at("output_dir"), baseDir);
    if (j.contains("seed")) {
      const auto& seed = j["seed"];
      if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<int64_t>() < 0)) {
        throw FormatError("seed must be a nonnegative integer");
      }
      c.seed = seed.get<uint64_t>();
    }
    if (j.contains("stages")) {
      for (const auto& s : j["stages"]) {
        c.stages.push_back(parseStage(s.get<std::string>()));
      }
    } else {
      if (!c.weights) {
        c.stages.push_back(Stage::Skin);
      }
      c.stages.push_back(Stage::Fit);
      if (c.retarget) {
        c.stages.push_back(Stage::Retarget);
      }
      c.stages.push_back(Stage::Eval);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("malformed pipeline config: {}", e.what()));
  }
  for (size_t i = 1; i < c.stages.size(); ++i) {
    if (c.stages[i] <= c.stages[i - 1]) {
      throw FormatError("pipeline stages must be distinct and ordered skin, fit, retarget, eval");
    }
  }
  c.fit.seed = c.seed;
  return c;
}

PipelineConfig loadPipelineConfig(const fs::path& path) {
  return pipelineConfigFromJson(readJsonFile(path), path.parent_path());
}

nlohmann::json pipelineConfigToJson(const PipelineConfig& c) {
  nlohmann::json j;
  j["canonical_mesh"] = c.canonicalMesh.string();
  j["skeleton"] = c.skeleton.string();
  if (c.weights) {
    j["weights"] = c.weights->string();
  }
  if (c.supervisionDir) {
    j["supervision_dir"] = c.supervisionDir->string();
  }
  nlohmann::json stages = nlohmann::json::array();
  for (const Stage s : c.stages) {
    stages.push_back(stageName(s));
  }
  j["stages"] = stages;
  j["skinning"] = {
      {"method", c.skinning.method == SkinningMethod::Heat ? "heat" : "gaussian"},
      {"radius_fraction", c.skinning.radiusFraction},
      {"heat_coefficient", c.skinning.heat.heatCoefficient},
  };
  j["fit"] = fitConfigToJson(c.fit);
  if (c.retarget) {
    const RetargetConfig& r = *c.retarget;
    nlohmann::json rj = {
        {"target_mesh", r.targetMesh.string()},
        {"embed", r.embed},
        {"resolution", r.resolution},
        {"scale_root_translation", r.scaleRootTranslation},
    };
    if (r.targetSkeleton) {
      rj["target_skeleton"] = r.targetSkeleton->string();
    }
    if (r.correspondence) {
      rj["correspondence"] = r.correspondence->string();
    }
    if (r.clip) {
      rj["clip"] = r.clip->string();
    }
    j["retarget"] = rj;
  }
  j["output_dir"] = c.outputDir.string();
  j["seed"] = c.seed;
  return j;
}

} // namespace kinemesh
