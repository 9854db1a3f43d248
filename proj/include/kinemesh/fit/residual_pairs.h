#pragma once

#include "kinemesh/geometry/triangle_bvh.h"
#include "kinemesh/geometry/tri_mesh.h"
#include "kinemesh/glc/chamfer.h"
#include "kinemesh/skinning/skin_weights.h"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace kinemesh {

// One weighted squared residual  weight * ||sum_j barycentric_j X[corners_j] - target||^2
// of a chamfer term with its nearest-neighbour choice frozen. A predicted vertex matched
// to a fixed point uses corners {i, i, i} and barycentric (1, 0, 0); a fixed point
// matched to the predicted surface uses the triangle it landed on.
struct ResidualPair {
  Face corners{};
  Vec3 barycentric = Vec3(1.0, 0.0, 0.0);
  Vec3 target = Vec3::Zero();
  double weight = 0.0;
  // Surface pairs: the unit direction along which the distance to the surface grows. The
  // Gauss-Newton curvature is projected onto it, so sliding along the surface is free.
  // Zero for vertex pairs.
  Vec3 normal = Vec3::Zero();
};

// Global chamfer pairs for point matches; their loss equals globalChamfer.
std::vector<ResidualPair> globalPairs(std::span<const Vec3> target, const ChamferMatches& matches);

// Local chamfer pairs for point matches; their loss equals localChamfer.
std::vector<ResidualPair> localPairs(
    std::span<const Vec3> target,
    const SkinWeights& predWeights,
    const SkinWeights& targetWeights,
    std::span<const PartMatches> parts);

// A mesh with closest-point indices over all of its triangles and over each part's
// triangles (those with at least one corner in the part).
class IndexedSurface {
 public:
  // Throws EmptyInputError for a mesh without triangles.
  IndexedSurface(std::span<const Vec3> vertices, std::span<const Face> faces, const PartDecomposition& parts);

  const std::vector<Vec3>& vertices() const {
    return vertices_;
  }
  const TriangleBvh& surface() const {
    return surface_;
  }
  bool hasPart(int bone) const;
  const TriangleBvh& partSurface(int bone) const;
  // Vertices labelled with `bone`, ascending.
  const std::vector<int>& partMembers(int bone) const;
  size_t boneCount() const {
    return parts_.size();
  }

 private:
  std::vector<Vec3> vertices_;
  TriangleBvh surface_;
  std::vector<std::vector<int>> members_;
  std::vector<std::optional<TriangleBvh>> parts_;
};

// Chamfer against the continuous surfaces instead of the vertex sets: every predicted
// vertex is matched to the closest point of the target surface and every target vertex to
// the closest point of the predicted surface. Both vanish exactly when the surfaces
// coincide, but unlike the vertex form they do not lock onto the sampling of the meshes.
std::vector<ResidualPair> globalSurfacePairs(const IndexedSurface& pred, const IndexedSurface& target);

// Part-level surface chamfer; the weight at a surface point interpolates the corner weights.
std::vector<ResidualPair> localSurfacePairs(
    const IndexedSurface& pred,
    const IndexedSurface& target,
    const SkinWeights& predWeights,
    const SkinWeights& targetWeights);

// Sum of the weighted squared residuals; optionally adds dLoss/dX into `gradient`.
double pairLoss(
    std::span<const ResidualPair> pairs,
    std::span<const Vec3> vertices,
    std::vector<Vec3>* gradient = nullptr);

// Adds the Gauss-Newton term 2 w J^T J of every pair, with J = sum_j beta_j dX[c_j]/dp.
void addPairHessian(
    std::span<const ResidualPair> pairs,
    std::span<const Eigen::MatrixXd> vertexJacobians,
    Eigen::MatrixXd& hessian,
    double scale = 1.0);

} // namespace kinemesh
