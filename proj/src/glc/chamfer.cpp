#include "kinemesh/glc/chamfer.h"

#include "kinemesh/common/error.h"
#include "kinemesh/common/parallel.h"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <stdexcept>

namespace kinemesh {

namespace {

const std::vector<int> kNoMembers;

void prepare(std::vector<Vec3>* gradient, size_t n) {
  if (gradient != nullptr && gradient->empty()) {
    gradient->assign(n, Vec3::Zero());
  }
  if (gradient != nullptr && gradient->size() != n) {
    throw DimensionError("gradient buffer does not match the predicted cloud");
  }
}

std::vector<int> nearestAll(std::span<const Vec3> queries, const PointKdTree& tree) {
  std::vector<int> out(queries.size());
  const auto n = static_cast<std::ptrdiff_t>(queries.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = tree.nearest(queries[i]).index;
  }
  return out;
}

} // namespace

IndexedCloud::IndexedCloud(std::span<const Vec3> points)
    : points_(points.begin(), points.end()), tree_(points) {}

IndexedCloud::IndexedCloud(std::span<const Vec3> points, const PartDecomposition& parts)
    : IndexedCloud(points) {
  if (parts.labels.size() != points_.size()) {
    throw DimensionError(fmt::format(
        "part labels cover {} points, cloud has {}", parts.labels.size(), points_.size()));
  }
  members_.resize(parts.boneCount);
  partTrees_.resize(parts.boneCount);
  for (size_t i = 0; i < parts.labels.size(); ++i) {
    const int label = parts.labels[i];
    if (label < 0 || static_cast<size_t>(label) >= parts.boneCount) {
      throw DimensionError(fmt::format("part label {} out of range", label));
    }
    members_[label].push_back(static_cast<int>(i));
  }
  for (size_t b = 0; b < members_.size(); ++b) {
    if (members_[b].empty()) {
      continue;
    }
    std::vector<Vec3> subset;
    subset.reserve(members_[b].size());
    for (const int i : members_[b]) {
      subset.push_back(points_[i]);
    }
    partTrees_[b] = std::make_unique<PointKdTree>(subset);
  }
}

bool IndexedCloud::hasPart(int bone) const {
  return bone >= 0 && static_cast<size_t>(bone) < partTrees_.size() && partTrees_[bone] != nullptr;
}

const std::vector<int>& IndexedCloud::partMembers(int bone) const {
  return hasPart(bone) ? members_[bone] : kNoMembers;
}

Neighbor IndexedCloud::nearestInPart(int bone, const Vec3& query) const {
  if (!hasPart(bone)) {
    throw std::out_of_range(fmt::format("cloud has no part {}", bone));
  }
  Neighbor n = partTrees_[bone]->nearest(query);
  n.index = members_[bone][n.index];
  return n;
}

ChamferMatches matchGlobal(const IndexedCloud& pred, const IndexedCloud& target) {
  return {nearestAll(pred.points(), target.tree()), nearestAll(target.points(), pred.tree())};
}

std::vector<PartMatches> matchLocal(const IndexedCloud& pred, const IndexedCloud& target) {
  std::vector<PartMatches> out;
  if (!pred.hasParts() || !target.hasParts()) {
    return out;
  }
  const int bones = static_cast<int>(std::min(pred.boneCount(), target.boneCount()));
  for (int k = 0; k < bones; ++k) {
    const bool inPred = pred.hasPart(k);
    const bool inTarget = target.hasPart(k);
    if (!inPred || !inTarget) {
      continue;
    }
    PartMatches m;
    m.bone = k;
    m.pred = pred.partMembers(k);
    m.target = target.partMembers(k);
    m.predToTarget.resize(m.pred.size());
    m.targetToPred.resize(m.target.size());
    for (size_t i = 0; i < m.pred.size(); ++i) {
      m.predToTarget[i] = target.nearestInPart(k, pred.points()[m.pred[i]]).index;
    }
    for (size_t i = 0; i < m.target.size(); ++i) {
      m.targetToPred[i] = pred.nearestInPart(k, target.points()[m.target[i]]).index;
    }
    out.push_back(std::move(m));
  }
  return out;
}

double globalChamfer(
    std::span<const Vec3> pred,
    std::span<const Vec3> target,
    const ChamferMatches& matches,
    std::vector<Vec3>* gradient) {
  prepare(gradient, pred.size());
  const double invPred = 1.0 / static_cast<double>(pred.size());
  const double invTarget = 1.0 / static_cast<double>(target.size());

  std::vector<double> forward(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    const Vec3 d = pred[i] - target[matches.predToTarget[i]];
    forward[i] = d.squaredNorm();
    if (gradient != nullptr) {
      (*gradient)[i] += 2.0 * invPred * d;
    }
  }
  std::vector<double> backward(target.size());
  for (size_t m = 0; m < target.size(); ++m) {
    const int i = matches.targetToPred[m];
    const Vec3 d = pred[i] - target[m];
    backward[m] = d.squaredNorm();
    if (gradient != nullptr) {
      (*gradient)[i] += 2.0 * invTarget * d;
    }
  }
  return stableMean(forward) + stableMean(backward);
}

double localChamfer(
    std::span<const Vec3> pred,
    std::span<const Vec3> target,
    const SkinWeights& predWeights,
    const SkinWeights& targetWeights,
    std::span<const PartMatches> parts,
    std::vector<Vec3>* gradient) {
  prepare(gradient, pred.size());
  if (parts.empty()) {
    return 0.0;
  }
  const double invParts = 1.0 / static_cast<double>(parts.size());
  std::vector<double> partTerms;
  partTerms.reserve(parts.size());
  for (const auto& part : parts) {
    const int k = part.bone;
    std::vector<double> forward(part.pred.size());
    const double invPred = 1.0 / static_cast<double>(part.pred.size());
    for (size_t i = 0; i < part.pred.size(); ++i) {
      const int x = part.pred[i];
      const int y = part.predToTarget[i];
      const double w = predWeights(x, k) * targetWeights(y, k);
      const Vec3 d = pred[x] - target[y];
      forward[i] = w * d.squaredNorm();
      if (gradient != nullptr) {
        (*gradient)[x] += 2.0 * w * invPred * invParts * d;
      }
    }
    std::vector<double> backward(part.target.size());
    const double invTarget = 1.0 / static_cast<double>(part.target.size());
    for (size_t m = 0; m < part.target.size(); ++m) {
      const int y = part.target[m];
      const int x = part.targetToPred[m];
      const double w = predWeights(x, k) * targetWeights(y, k);
      const Vec3 d = pred[x] - target[y];
      backward[m] = w * d.squaredNorm();
      if (gradient != nullptr) {
        (*gradient)[x] += 2.0 * w * invTarget * invParts * d;
      }
    }
    partTerms.push_back(stableMean(forward) + stableMean(backward));
  }
  return stableMean(partTerms);
}

double chamferGlobal(std::span<const Vec3> pred, std::span<const Vec3> target) {
  if (pred.empty() || target.empty()) {
    throw EmptyInputError("chamfer distance needs two nonempty point sets");
  }
  const IndexedCloud p(pred);
  const IndexedCloud t(target);
  return globalChamfer(pred, target, matchGlobal(p, t));
}

double chamferLocal(
    std::span<const Vec3> pred,
    std::span<const Vec3> target,
    const SkinWeights& predWeights,
    const SkinWeights& targetWeights,
    const PartDecomposition& predParts,
    const PartDecomposition& targetParts) {
  if (pred.empty() || target.empty()) {
    throw EmptyInputError("chamfer distance needs two nonempty point sets");
  }
  if (predWeights.vertexCount() != pred.size() || targetWeights.vertexCount() != target.size()) {
    throw DimensionError(fmt::format(
        "weights have {} and {} rows for clouds of {} and {} points",
        predWeights.vertexCount(),
        targetWeights.vertexCount(),
        pred.size(),
        target.size()));
  }
  if (predWeights.boneCount() != targetWeights.boneCount() ||
      predParts.boneCount != targetParts.boneCount ||
      predParts.boneCount != predWeights.boneCount()) {
    throw DimensionError("local chamfer operands use different bone sets");
  }
  const IndexedCloud p(pred, predParts);
  const IndexedCloud t(target, targetParts);
  const auto parts = matchLocal(p, t);
  if (parts.empty()) {
    spdlog::warn("local chamfer: the two clouds share no part; returning 0");
    return 0.0;
  }
  return localChamfer(pred, target, predWeights, targetWeights, parts);
}

double glcLoss(
    std::span<const Vec3> pred,
    std::span<const Vec3> target,
    const SkinWeights& predWeights,
    const SkinWeights& targetWeights,
    double localWeight) {
  if (localWeight < 0.0) {
    throw std::invalid_argument("local chamfer weight must be nonnegative");
  }
  const double global = chamferGlobal(pred, target);
  if (localWeight == 0.0) {
    return global;
  }
  return global +
      localWeight *
      chamferLocal(pred, target, predWeights, targetWeights, partDecompose(predWeights), partDecompose(targetWeights));
}

} // namespace kinemesh
