#pragma once

#include "kinemesh/fit/fit_config.h"
#include "kinemesh/fit/residual_pairs.h"
#include "kinemesh/geometry/tri_mesh.h"
#include "kinemesh/glc/chamfer.h"
#include "kinemesh/skeleton/skeleton.h"
#include "kinemesh/skinning/skin_weights.h"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace kinemesh {

// Flat parameter vector of one frame:
//   [root rotation vector (3), root translation (3), bone angles (3B), bone scales (B)].
Eigen::VectorXd packFrame(const MotionFrame& frame);
// Throws DimensionError unless params.size() == 6 + 4B.
MotionFrame unpackFrame(const Eigen::VectorXd& params, size_t boneCount);
size_t frameParameterCount(size_t boneCount);

struct LossTerms {
  double global = 0.0;
  double local = 0.0;
  double symmetry = 0.0;
  double laplacian = 0.0;
  double rigidity = 0.0;
  double total = 0.0;
};

// How the chamfer terms pair the two meshes.
enum class ChamferMode {
  // Vertex to nearest vertex: the chamfer distance of the two vertex sets.
  Points,
  // Vertex to closest surface point, in both directions. Needs triangles on both meshes.
  Surface,
};

// Nearest-neighbour correspondences of one evaluation, held fixed while differentiating.
struct FrameMatches {
  std::vector<ResidualPair> global;
  std::vector<ResidualPair> local;
  std::vector<int> symmetryPartners;
};

// Per-frame fitting objective
//   lg * chamfer_global + ll * chamfer_local + ls * symmetry (frame 0 only)
//   + lp * laplacian + lr * rigidity (against the previous fitted frame)
// of the blend-skinned canonical mesh against one supervision mesh.
class FrameObjective {
 public:
  // `previous` holds the previous frame's fitted vertices, or is empty for the first frame.
  // All references must outlive the objective. Throws DimensionError on size mismatches and
  // EmptyInputError for an empty supervision mesh, or in surface mode for a mesh without
  // triangles.
  FrameObjective(
      const TriMesh& canonical,
      const Skeleton& skeleton,
      const SkinWeights& weights,
      const TriMesh& supervision,
      const SkinWeights& supervisionWeights,
      const FitConfig& config,
      std::span<const Vec3> previous,
      bool applySymmetry,
      ChamferMode mode = ChamferMode::Points);

  size_t parameterCount() const {
    return frameParameterCount(skeleton_.boneCount());
  }

  // Blend-skinned canonical vertices for the given parameters.
  std::vector<Vec3> deform(const Eigen::VectorXd& params) const;

  FrameMatches match(std::span<const Vec3> deformed) const;

  // Loss with the given correspondences; optionally the gradient with respect to params.
  LossTerms evaluate(
      const Eigen::VectorXd& params,
      const FrameMatches& matches,
      Eigen::VectorXd* gradient = nullptr) const;

  // Loss after re-matching at `params`; this is the exact objective value.
  LossTerms evaluate(const Eigen::VectorXd& params) const;

  // Gradient with correspondences re-matched at `params` and then held fixed.
  Eigen::VectorXd gradient(const Eigen::VectorXd& params) const;

  // d X_n / d params for every deformed vertex, each 3 x parameterCount().
  std::vector<Eigen::MatrixXd> vertexJacobians(const Eigen::VectorXd& params) const;

  // Gauss-Newton approximation of the Hessian with the given correspondences: every term
  // is a sum of squared residuals, and the residual Jacobians are kept to first order.
  Eigen::MatrixXd gaussNewtonHessian(const Eigen::VectorXd& params, const FrameMatches& matches) const;

  // Squared bounding-box diagonal of the canonical mesh; losses below a tiny fraction of
  // it are treated as zero.
  double lossScale() const {
    return diagonal_ * diagonal_;
  }

  // Characteristic magnitude of each parameter, used for step sizes and finite differences.
  Eigen::VectorXd parameterScales() const;

 private:
  LossTerms lossAndVertexGradient(
      std::span<const Vec3> deformed,
      const FrameMatches& matches,
      std::vector<Vec3>* vertexGradient) const;

  const TriMesh& canonical_;
  const Skeleton& skeleton_;
  const SkinWeights& weights_;
  const TriMesh& supervision_;
  const SkinWeights& supervisionWeights_;
  const FitConfig& config_;
  std::vector<Vec3> previous_;
  bool applySymmetry_;
  ChamferMode mode_;
  PartDecomposition predParts_;
  std::optional<IndexedCloud> targetCloud_;
  std::optional<IndexedSurface> targetSurface_;
  double diagonal_;
};

} // namespace kinemesh
