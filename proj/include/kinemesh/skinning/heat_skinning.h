#pragma once

#include "kinemesh/geometry/tri_mesh.h"
#include "kinemesh/skeleton/skeleton.h"
#include "kinemesh/skinning/skin_weights.h"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <vector>

namespace kinemesh {

struct HeatSkinningOptions {
  // Heat transfer coefficient c in H_ii = c / d_i^2.
  double heatCoefficient = 1.0;
  // Lower clamp on each cotangent edge weight.
  double minCotangentWeight = 1e-8;
};

// Symmetric positive semidefinite cotangent Laplacian: L_ij = -w_ij, L_ii = sum_j w_ij with
// w_ij = (cot alpha + cot beta) / 2 clamped below by `minWeight`.
Eigen::SparseMatrix<double> cotangentLaplacian(const TriMesh& mesh, double minWeight = 1e-8);

// One third of the total area of the triangles around each vertex.
Eigen::VectorXd lumpedVertexAreas(const TriMesh& mesh);

// Distance from `p` to the segment [a, b] and the closest point on it.
double pointSegmentDistance(
    const Eigen::Vector3d& p,
    const Eigen::Vector3d& a,
    const Eigen::Vector3d& b,
    Eigen::Vector3d* closest = nullptr);

// Heat sources per vertex: the nearest bone segment that is visible from the vertex (the
// straight line to its closest point does not pass through the mesh).
struct BoneHeatSources {
  // H_ii = c / d_i^2 for the nearest visible bone, 0 when no bone is visible.
  Eigen::VectorXd heat;
  // p_b: 1 for the nearest visible bone (split evenly on exact ties), else 0.
  Eigen::MatrixXd sources;
  // Nearest visible bone per vertex, -1 when none.
  std::vector<int> nearestBone;
};

// On open meshes a vertex that sees no bone treats every bone as visible.
BoneHeatSources boneHeatSources(
    const TriMesh& mesh,
    const Skeleton& skeleton,
    const HeatSkinningOptions& options = {});

// Bone-heat weights: for each bone solve (L + A H) w_b = A H p_b, with L the cotangent
// Laplacian and A the lumped vertex areas; then clamp to >= 0 and normalize rows.
// Connected components without any heat source are bound one-hot to their nearest bone,
// with a warning. Throws DimensionError for fewer than 4 vertices or no bones.
SkinWeights heatDiffusionSkinning(
    const TriMesh& mesh,
    const Skeleton& skeleton,
    const HeatSkinningOptions& options = {});

} // namespace kinemesh
