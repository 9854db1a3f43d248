#include "kinemesh/common/json_file.h"
#include "kinemesh/geometry/mesh_io.h"
#include "kinemesh/pipeline/pipeline.h"
#include "kinemesh/retarget/correspondence.h"
#include "kinemesh/skeleton/serialization.h"
#include "kinemesh/skinning/skin_weights.h"

#include <fmt/format.h>

#include <algorithm>
#include <optional>

namespace kinemesh {

namespace {

namespace fs = std::filesystem;

bool hasStage(const PipelineConfig& c, Stage s) {
  return std::find(c.stages.begin(), c.stages.end(), s) != c.stages.end();
}

bool exists(const fs::path& path, const char* what, std::vector<std::string>& out) {
  if (!fs::exists(path)) {
    out.push_back(fmt::format("{} '{}' does not exist", what, path.string()));
    return false;
  }
  return true;
}

std::optional<TriMesh> checkMesh(const fs::path& path, const char* what, std::vector<std::string>& out) {
  if (!exists(path, what, out)) {
    return std::nullopt;
  }
  try {
    TriMesh mesh = loadMesh(path);
    if (mesh.faceCount() == 0) {
      out.push_back(fmt::format("{} '{}' has no faces", what, path.string()));
    }
    return mesh;
  } catch (const std::exception& e) {
    out.push_back(fmt::format("{} '{}': {}", what, path.string(), e.what()));
    return std::nullopt;
  }
}

std::optional<Skeleton> checkSkeleton(const fs::path& path, const char* what, std::vector<std::string>& out) {
  if (!exists(path, what, out)) {
    return std::nullopt;
  }
  try {
    const nlohmann::json j = readJsonFile(path);
    const auto parents = j.at("parents").get<std::vector<int>>();
    const size_t joints = j.at("joints").size();
    if (joints != parents.size()) {
      out.push_back(fmt::format(
          "{} '{}' has {} joints but {} parents", what, path.string(), joints, parents.size()));
      return std::nullopt;
    }
    const auto problems = skeletonTopologyDiagnostics(parents);
    if (!problems.empty()) {
      for (const auto& p : problems) {
        out.push_back(fmt::format("{} '{}': {}", what, path.string(), p));
      }
      return std::nullopt;
    }
    return skeletonFromJson(j);
  } catch (const std::exception& e) {
    out.push_back(fmt::format("{} '{}': {}", what, path.string(), e.what()));
    return std::nullopt;
  }
}

} // namespace

std::vector<fs::path> supervisionFiles(const fs::path& directory) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".obj") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) {
    throw EmptyInputError(fmt::format("no .obj files in '{}'", directory.string()));
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<std::string> validateAssets(const PipelineConfig& config) {
  std::vector<std::string> out;
  const auto canonical = checkMesh(config.canonicalMesh, "canonical mesh", out);
  const auto skeleton = checkSkeleton(config.skeleton, "skeleton", out);

  if (config.weights && exists(*config.weights, "weights", out)) {
    try {
      const SkinWeights w = loadWeights(*config.weights);
      if (canonical && w.vertexCount() != canonical->vertexCount()) {
        out.push_back(fmt::format(
            "weights '{}' have {} rows but the canonical mesh has {} vertices",
            config.weights->string(),
            w.vertexCount(),
            canonical->vertexCount()));
      }
      if (skeleton && w.boneCount() != skeleton->boneCount()) {
        out.push_back(fmt::format(
            "weights '{}' have {} columns but the skeleton has {} bones",
            config.weights->string(),
            w.boneCount(),
            skeleton->boneCount()));
      }
    } catch (const std::exception& e) {
      out.push_back(fmt::format("weights '{}': {}", config.weights->string(), e.what()));
    }
  }

  const bool fit = hasStage(config, Stage::Fit);
  if (fit || hasStage(config, Stage::Eval)) {
    if (!config.supervisionDir) {
      out.push_back("fit and eval stages need supervision_dir");
    } else if (exists(*config.supervisionDir, "supervision directory", out)) {
      try {
        for (const auto& file : supervisionFiles(*config.supervisionDir)) {
          checkMesh(file, "supervision mesh", out);
        }
      } catch (const std::exception& e) {
        out.push_back(fmt::format("supervision directory: {}", e.what()));
      }
    }
  }
  if (fit && !config.weights && !hasStage(config, Stage::Skin)) {
    out.push_back("fit stage needs weights or the skin stage");
  }
  if (hasStage(config, Stage::Eval) && !fit) {
    out.push_back("eval stage needs the fit stage");
  }

  if (hasStage(config, Stage::Retarget)) {
    if (!config.retarget) {
      out.push_back("retarget stage needs a retarget section");
      return out;
    }
    const RetargetConfig& r = *config.retarget;
    checkMesh(r.targetMesh, "target mesh", out);
    if (!fit) {
      if (!r.clip) {
        out.push_back("retarget without the fit stage needs retarget.clip");
      } else {
        exists(*r.clip, "clip", out);
      }
    }
    if (r.resolution < 8) {
      out.push_back(fmt::format("retarget resolution must be at least 8, got {}", r.resolution));
    }
    std::optional<Skeleton> target;
    if (r.targetSkeleton) {
      target = checkSkeleton(*r.targetSkeleton, "target skeleton", out);
    } else if (!r.embed) {
      out.push_back("retarget needs target_skeleton unless embed is set");
    } else {
      target = skeleton;
    }
    if (skeleton && target) {
      if (r.correspondence) {
        if (exists(*r.correspondence, "correspondence", out)) {
          try {
            for (const auto& p : loadCorrespondence(*r.correspondence).diagnostics(*skeleton, *target)) {
              out.push_back(fmt::format("correspondence '{}': {}", r.correspondence->string(), p));
            }
          } catch (const std::exception& e) {
            out.push_back(fmt::format("correspondence '{}': {}", r.correspondence->string(), e.what()));
          }
        }
      } else if (skeleton->jointCount() != target->jointCount()) {
        out.push_back(fmt::format(
            "no correspondence given and the skeletons differ ({} vs {} joints)",
            skeleton->jointCount(),
            target->jointCount()));
      }
    }
  }
  return out;
}

} // namespace kinemesh
