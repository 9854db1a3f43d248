#pragma once

#include "kinemesh/skeleton/rigid_transform.h"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kinemesh {

// Problems with a parent array, one message per problem; empty for a single rooted tree.
// Cycles are reported with the joints that form them.
std::vector<std::string> skeletonTopologyDiagnostics(std::span<const int> parents);

// Kinematic tree of joints in rest pose. Every non-root joint j owns the bone
// (parent(j), j); bones are numbered in increasing joint order, skipping the root, so
// B = J - 1.
class Skeleton {
 public:
  Skeleton() = default;

  // Throws SkeletonError unless `parents` describes a single tree (exactly one -1).
  Skeleton(
      std::vector<Eigen::Vector3d> joints,
      std::vector<int> parents,
      std::vector<std::string> names = {});

  // Same topology and names, new rest positions.
  Skeleton withJoints(std::vector<Eigen::Vector3d> joints) const;

  size_t jointCount() const {
    return joints_.size();
  }
  size_t boneCount() const {
    return joints_.empty() ? 0 : joints_.size() - 1;
  }

  const std::vector<Eigen::Vector3d>& joints() const {
    return joints_;
  }
  const std::vector<int>& parents() const {
    return parents_;
  }
  const std::vector<std::string>& names() const {
    return names_;
  }
  int root() const {
    return root_;
  }

  // Joints ordered so that each parent precedes its children.
  const std::vector<int>& order() const {
    return order_;
  }
  const std::vector<std::vector<int>>& children() const {
    return children_;
  }

  int boneJoint(int bone) const {
    return boneJoints_[bone];
  }
  // -1 for the root.
  int jointBone(int joint) const {
    return jointBones_[joint];
  }
  // Bone ending at the parent joint of `bone`, or -1 when that parent is the root.
  int parentBone(int bone) const {
    return jointBones_[parents_[boneJoints_[bone]]];
  }

  const std::vector<double>& restLengths() const {
    return restLengths_;
  }
  // Rest-pose vector from the parent joint to the bone's joint.
  Eigen::Vector3d boneVector(int bone) const;

  // True if `joint` is `ancestor` or lies in its subtree.
  bool inSubtree(int joint, int ancestor) const;

  // Sum of rest lengths along the longest root-to-leaf path.
  double height() const;

 private:
  std::vector<Eigen::Vector3d> joints_;
  std::vector<int> parents_;
  std::vector<std::string> names_;
  int root_ = -1;
  std::vector<int> order_;
  std::vector<std::vector<int>> children_;
  std::vector<int> boneJoints_;
  std::vector<int> jointBones_;
  std::vector<double> restLengths_;
};

struct ScaleBounds {
  double min = 0.8;
  double max = 1.25;

  double clamp(double s) const;
  bool contains(double s) const {
    return s >= min && s <= max;
  }
};

// One time step: root transform, per-bone rotation vectors (radians) and bone-length scales.
struct MotionFrame {
  RigidTransform root;
  std::vector<Eigen::Vector3d> angles;
  std::vector<double> boneScales;

  static MotionFrame rest(size_t boneCount);

  size_t boneCount() const {
    return angles.size();
  }
  // Throws DimensionError if the frame does not have `boneCount` angles and scales, and
  // std::invalid_argument for non-finite angles or non-positive scales.
  void checkFor(size_t boneCount) const;
};

// Time-ordered frames over one skeleton. Frame 0 is the canonical frame.
struct MotionClip {
  std::optional<double> fps;
  std::vector<MotionFrame> frames;
};

} // namespace kinemesh
