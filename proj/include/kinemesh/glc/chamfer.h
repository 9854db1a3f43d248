#pragma once

#include "kinemesh/geometry/kd_tree.h"
#include "kinemesh/geometry/tri_mesh.h"
#include "kinemesh/skinning/skin_weights.h"

#include <memory>
#include <span>
#include <vector>

namespace kinemesh {

// A point set with an exact nearest-neighbour index, optionally split into parts by an
// argmax decomposition with one sub-index per present part.
class IndexedCloud {
 public:
  // Throws EmptyInputError for an empty point set.
  explicit IndexedCloud(std::span<const Vec3> points);
  // Throws DimensionError if the decomposition does not label every point.
  IndexedCloud(std::span<const Vec3> points, const PartDecomposition& parts);

  const std::vector<Vec3>& points() const {
    return points_;
  }
  size_t size() const {
    return points_.size();
  }
  const PointKdTree& tree() const {
    return tree_;
  }
  bool hasParts() const {
    return !partTrees_.empty();
  }
  // Bone count of the decomposition, or 0 without parts.
  size_t boneCount() const {
    return partTrees_.size();
  }
  bool hasPart(int bone) const;
  // Global point indices of the part, ascending.
  const std::vector<int>& partMembers(int bone) const;
  // Nearest point of the part; the returned index is global.
  Neighbor nearestInPart(int bone, const Vec3& query) const;

 private:
  std::vector<Vec3> points_;
  PointKdTree tree_;
  std::vector<std::vector<int>> members_; // per bone
  std::vector<std::unique_ptr<PointKdTree>> partTrees_; // per bone, null when absent
};

// Nearest-neighbour pairs for both directed terms of the global chamfer distance.
struct ChamferMatches {
  std::vector<int> predToTarget;
  std::vector<int> targetToPred;
};

// Same for one part k present in both clouds. Indices are global.
struct PartMatches {
  int bone = 0;
  std::vector<int> pred;
  std::vector<int> predToTarget;
  std::vector<int> target;
  std::vector<int> targetToPred;
};

ChamferMatches matchGlobal(const IndexedCloud& pred, const IndexedCloud& target);

// One entry per part present in both clouds, in increasing bone order.
std::vector<PartMatches> matchLocal(const IndexedCloud& pred, const IndexedCloud& target);

// Global chamfer for fixed matches; optionally adds dLoss/dpred into `gradient`.
double globalChamfer(
    std::span<const Vec3> pred,
    std::span<const Vec3> target,
    const ChamferMatches& matches,
    std::vector<Vec3>* gradient = nullptr);

// Local chamfer for fixed matches: the mean over parts of both directed terms, each squared
// distance scaled by W[x,k] * What[y,k] at the matched pair. Returns 0 for no parts.
double localChamfer(
    std::span<const Vec3> pred,
    std::span<const Vec3> target,
    const SkinWeights& predWeights,
    const SkinWeights& targetWeights,
    std::span<const PartMatches> parts,
    std::vector<Vec3>* gradient = nullptr);

// (1/|S|) sum_x min_y ||x-y||^2 + (1/|S^|) sum_y min_x ||x-y||^2.
// Throws EmptyInputError if either cloud is empty.
double chamferGlobal(std::span<const Vec3> pred, std::span<const Vec3> target);

// Part-level chamfer over the parts present in both decompositions. Parts present in only
// one cloud are skipped; with no common part the result is 0 and a warning is logged.
// Throws DimensionError when weight rows or labels do not match the clouds, or the two
// weight matrices have different bone counts.
double chamferLocal(
    std::span<const Vec3> pred,
    std::span<const Vec3> target,
    const SkinWeights& predWeights,
    const SkinWeights& targetWeights,
    const PartDecomposition& predParts,
    const PartDecomposition& targetParts);

// chamferGlobal + localWeight * chamferLocal, with parts from partDecompose.
double glcLoss(
    std::span<const Vec3> pred,
    std::span<const Vec3> target,
    const SkinWeights& predWeights,
    const SkinWeights& targetWeights,
    double localWeight = 1.0);

} // namespace kinemesh
