#pragma once

#include "kinemesh/common/error.h"
#include "kinemesh/geometry/tri_mesh.h"
#include "kinemesh/pipeline/pipeline_config.h"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace kinemesh {

// Assets failed validation; the pipeline did not start.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const {
    return diagnostics_;
  }

 private:
  std::vector<std::string> diagnostics_;
};

// A stage threw; its partial outputs are in the quarantine directory.
class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& cause);
  Stage stage() const {
    return stage_;
  }

 private:
  Stage stage_;
};

// Checks referenced paths, mesh validity, skeleton tree-ness, weight dimensions,
// correspondence chain consistency and stage prerequisites. One message per problem;
// empty when everything passes.
std::vector<std::string> validateAssets(const PipelineConfig& config);

// .obj files of a directory in file-name order. Throws EmptyInputError when there are none.
std::vector<std::filesystem::path> supervisionFiles(const std::filesystem::path& directory);

// Runs the configured stages. Outputs are written to <output>/.staging and moved into
// <output> only when every stage succeeds; on failure the staging directory becomes
// <output>/quarantine with an error.json naming the stage. Returns the summary, also
// written to <output>/summary.json; it holds no timing values so that identical inputs
// give identical bytes. Throws ValidationError or StageError.
nlohmann::json runPipeline(const PipelineConfig& config);

} // namespace kinemesh
