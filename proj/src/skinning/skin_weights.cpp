#include "kinemesh/skinning/skin_weights.h"

#include "kinemesh/common/error.h"
#include "kinemesh/common/json_file.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kinemesh {

SkinWeights::SkinWeights(Eigen::MatrixXd weights, double tolerance) : weights_(std::move(weights)) {
  for (Eigen::Index v = 0; v < weights_.rows(); ++v) {
    double sum = 0.0;
    for (Eigen::Index b = 0; b < weights_.cols(); ++b) {
      const double w = weights_(v, b);
      if (!std::isfinite(w) || w < 0.0) {
        throw std::invalid_argument(fmt::format("weight ({}, {}) = {} is invalid", v, b, w));
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw std::invalid_argument(fmt::format("weight row {} sums to {}", v, sum));
    }
  }
}

SkinWeights SkinWeights::normalized(Eigen::MatrixXd weights) {
  weights = weights.cwiseMax(0.0);
  for (Eigen::Index v = 0; v < weights.rows(); ++v) {
    const double sum = weights.row(v).sum();
    if (sum > 0.0) {
      weights.row(v) /= sum;
    }
  }
  return SkinWeights(std::move(weights));
}

SkinWeights SkinWeights::oneHot(const std::vector<int>& labels, size_t boneCount) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), boneCount);
  for (size_t v = 0; v < labels.size(); ++v) {
    w(v, labels[v]) = 1.0;
  }
  return SkinWeights(std::move(w));
}

bool PartDecomposition::isPresent(int bone) const {
  return std::binary_search(presentParts.begin(), presentParts.end(), bone);
}

PartDecomposition partDecompose(const SkinWeights& weights) {
  PartDecomposition parts;
  parts.boneCount = weights.boneCount();
  parts.labels.resize(weights.vertexCount());
  std::vector<bool> present(weights.boneCount(), false);
  const auto& w = weights.matrix();
  for (Eigen::Index v = 0; v < w.rows(); ++v) {
    int best = 0;
    for (Eigen::Index b = 1; b < w.cols(); ++b) {
      if (w(v, b) > w(v, best)) {
        best = static_cast<int>(b);
      }
    }
    parts.labels[v] = best;
    present[best] = true;
  }
  for (size_t b = 0; b < present.size(); ++b) {
    if (present[b]) {
      parts.presentParts.push_back(static_cast<int>(b));
    }
  }
  return parts;
}

nlohmann::json weightsToJson(const SkinWeights& weights) {
  nlohmann::json rows = nlohmann::json::array();
  const auto& w = weights.matrix();
  for (Eigen::Index v = 0; v < w.rows(); ++v) {
    std::vector<double> row(w.cols());
    for (Eigen::Index b = 0; b < w.cols(); ++b) {
      row[b] = w(v, b);
    }
    rows.push_back(std::move(row));
  }
  nlohmann::json j;
  j["num_vertices"] = weights.vertexCount();
  j["num_bones"] = weights.boneCount();
  j["rows"] = std::move(rows);
  return j;
}

SkinWeights weightsFromJson(const nlohmann::json& j) {
  try {
    const auto n = j.at("num_vertices").get<size_t>();
    const auto b = j.at("num_bones").get<size_t>();
    const auto& rows = j.at("rows");
    if (rows.size() != n) {
      throw FormatError(fmt::format("weights declare {} vertices but have {} rows", n, rows.size()));
    }
    Eigen::MatrixXd w(n, b);
    for (size_t v = 0; v < n; ++v) {
      const auto row = rows[v].get<std::vector<double>>();
      if (row.size() != b) {
        throw FormatError(fmt::format("weight row {} has {} entries, expected {}", v, row.size(), b));
      }
      for (size_t k = 0; k < b; ++k) {
        w(v, k) = row[k];
      }
    }
    return SkinWeights(std::move(w));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("malformed weights document: {}", e.what()));
  } catch (const std::invalid_argument& e) {
    throw FormatError(fmt::format("invalid weights: {}", e.what()));
  }
}

SkinWeights loadWeights(const std::filesystem::path& path) {
  return weightsFromJson(readJsonFile(path));
}

} // namespace kinemesh
