#include "kinemesh/skeleton/skeleton.h"

#include "kinemesh/common/error.h"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kinemesh {

std::vector<std::string> skeletonTopologyDiagnostics(std::span<const int> parents) {
  std::vector<std::string> problems;
  const int n = static_cast<int>(parents.size());
  if (n == 0) {
    problems.emplace_back("skeleton has no joints");
    return problems;
  }
  int roots = 0;
  for (int j = 0; j < n; ++j) {
    if (parents[j] == -1) {
      ++roots;
    } else if (parents[j] < -1 || parents[j] >= n) {
      problems.push_back(fmt::format("joint {} has invalid parent {}", j, parents[j]));
    } else if (parents[j] == j) {
      problems.push_back(fmt::format("joint {} is its own parent", j));
    }
  }
  if (roots != 1) {
    problems.push_back(fmt::format("skeleton must have exactly one root, found {}", roots));
  }
  if (!problems.empty()) {
    return problems;
  }

  // Follow parent pointers; a walk that revisits a joint before reaching the root is a cycle.
  std::vector<int> state(n, 0); // 0 unvisited, 1 on current walk, 2 reaches root
  for (int start = 0; start < n; ++start) {
    std::vector<int> walk;
    int j = start;
    while (j != -1 && state[j] == 0) {
      state[j] = 1;
      walk.push_back(j);
      j = parents[j];
    }
    if (j != -1 && state[j] == 1) {
      std::vector<int> cycle(std::find(walk.begin(), walk.end(), j), walk.end());
      std::sort(cycle.begin(), cycle.end());
      problems.push_back(fmt::format("parent cycle through joints {}", fmt::join(cycle, ", ")));
      for (const int w : walk) {
        state[w] = 3;
      }
      continue;
    }
    const int outcome = (j == -1 || state[j] == 2) ? 2 : 3;
    for (const int w : walk) {
      state[w] = outcome;
    }
  }
  return problems;
}

Skeleton::Skeleton(
    std::vector<Eigen::Vector3d> joints,
    std::vector<int> parents,
    std::vector<std::string> names)
    : joints_(std::move(joints)), parents_(std::move(parents)), names_(std::move(names)) {
  if (joints_.size() != parents_.size()) {
    throw SkeletonError(fmt::format(
        "{} joint positions but {} parent entries", joints_.size(), parents_.size()));
  }
  if (!names_.empty() && names_.size() != joints_.size()) {
    throw SkeletonError(fmt::format("{} names for {} joints", names_.size(), joints_.size()));
  }
  const auto problems = skeletonTopologyDiagnostics(parents_);
  if (!problems.empty()) {
    throw SkeletonError(fmt::format("invalid skeleton: {}", fmt::join(problems, "; ")));
  }

  const int n = static_cast<int>(joints_.size());
  children_.resize(n);
  for (int j = 0; j < n; ++j) {
    if (parents_[j] < 0) {
      root_ = j;
    } else {
      children_[parents_[j]].push_back(j);
    }
  }
  order_.reserve(n);
  order_.push_back(root_);
  for (size_t i = 0; i < order_.size(); ++i) {
    for (const int c : children_[order_[i]]) {
      order_.push_back(c);
    }
  }

  jointBones_.assign(n, -1);
  for (int j = 0; j < n; ++j) {
    if (j != root_) {
      jointBones_[j] = static_cast<int>(boneJoints_.size());
      boneJoints_.push_back(j);
      restLengths_.push_back((joints_[j] - joints_[parents_[j]]).norm());
    }
  }
}

Skeleton Skeleton::withJoints(std::vector<Eigen::Vector3d> joints) const {
  if (joints.size() != joints_.size()) {
    throw DimensionError(fmt::format("expected {} joints, got {}", joints_.size(), joints.size()));
  }
  return Skeleton(std::move(joints), parents_, names_);
}

Eigen::Vector3d Skeleton::boneVector(int bone) const {
  const int j = boneJoints_[bone];
  return joints_[j] - joints_[parents_[j]];
}

bool Skeleton::inSubtree(int joint, int ancestor) const {
  for (int j = joint; j != -1; j = parents_[j]) {
    if (j == ancestor) {
      return true;
    }
  }
  return false;
}

double Skeleton::height() const {
  std::vector<double> depth(joints_.size(), 0.0);
  double best = 0.0;
  for (const int j : order_) {
    if (j != root_) {
      depth[j] = depth[parents_[j]] + restLengths_[jointBones_[j]];
    }
    best = std::max(best, depth[j]);
  }
  return best;
}

double ScaleBounds::clamp(double s) const {
  return std::clamp(s, min, max);
}

MotionFrame MotionFrame::rest(size_t boneCount) {
  MotionFrame f;
  f.angles.assign(boneCount, Eigen::Vector3d::Zero());
  f.boneScales.assign(boneCount, 1.0);
  return f;
}

void MotionFrame::checkFor(size_t boneCount) const {
  if (angles.size() != boneCount || boneScales.size() != boneCount) {
    throw DimensionError(fmt::format(
        "frame has {} angles and {} bone scales; skeleton has {} bones",
        angles.size(),
        boneScales.size(),
        boneCount));
  }
  for (size_t b = 0; b < boneCount; ++b) {
    if (!angles[b].allFinite()) {
      throw std::invalid_argument(fmt::format("non-finite angle on bone {}", b));
    }
    if (!(boneScales[b] > 0.0) || !std::isfinite(boneScales[b])) {
      throw std::invalid_argument(fmt::format("bone {} has invalid scale {}", b, boneScales[b]));
    }
  }
}

} // namespace kinemesh
