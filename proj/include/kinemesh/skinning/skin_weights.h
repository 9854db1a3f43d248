#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

namespace kinemesh {

// N x B row-stochastic matrix binding vertices to bones.
class SkinWeights {
 public:
  SkinWeights() = default;

  // Throws std::invalid_argument when an entry is negative or non-finite, or a row does
  // not sum to 1 within `tolerance`.
  explicit SkinWeights(Eigen::MatrixXd weights, double tolerance = 1e-6);

  // Clamps negatives to zero and rescales rows to sum to 1. Rows that sum to zero are
  // left as they are, which the constructor then rejects.
  static SkinWeights normalized(Eigen::MatrixXd weights);

  // Row v is the unit vector of bone labels[v].
  static SkinWeights oneHot(const std::vector<int>& labels, size_t boneCount);

  size_t vertexCount() const {
    return static_cast<size_t>(weights_.rows());
  }
  size_t boneCount() const {
    return static_cast<size_t>(weights_.cols());
  }
  double operator()(size_t vertex, size_t bone) const {
    return weights_(vertex, bone);
  }
  const Eigen::MatrixXd& matrix() const {
    return weights_;
  }

 private:
  Eigen::MatrixXd weights_;
};

// Per-vertex argmax bone. Labels are bone indices; `presentParts` lists the bones that
// label at least one vertex in increasing order, so K = presentParts.size() <= B.
struct PartDecomposition {
  std::vector<int> labels;
  std::vector<int> presentParts;
  size_t boneCount = 0;

  size_t partCount() const {
    return presentParts.size();
  }
  bool isPresent(int bone) const;
};

// Row argmax with ties going to the lowest bone index.
PartDecomposition partDecompose(const SkinWeights& weights);

// {"num_vertices": N, "num_bones": B, "rows": [[w...]...]}
nlohmann::json weightsToJson(const SkinWeights& weights);
SkinWeights weightsFromJson(const nlohmann::json& j);
SkinWeights loadWeights(const std::filesystem::path& path);

} // namespace kinemesh
