#pragma once

#include "kinemesh/deform/blend_skin.h"
#include "kinemesh/geometry/symmetry.h"
#include "kinemesh/geometry/tri_mesh.h"

#include <span>
#include <vector>

namespace kinemesh {

// All losses are mean-reduced and nonnegative. Functions taking a `gradient` pointer add
// dLoss/dX into it (resized and zeroed when empty), for use by the optimizer.

// For every vertex i, the index j minimizing ||v_j - reflect(v_i)|| (lowest index on ties).
std::vector<int> symmetryPartners(std::span<const Vec3> vertices, const SymmetryPlane& plane);

// mean_i ||v_{partner(i)} - reflect(v_i)||^2 with the partners held fixed.
double symmetryLoss(
    std::span<const Vec3> vertices,
    const SymmetryPlane& plane,
    std::span<const int> partners,
    std::vector<Vec3>* gradient = nullptr);

// mean_i min_j ||v_j - reflect(v_i)||^2.
double symmetryLoss(std::span<const Vec3> vertices, const SymmetryPlane& plane = {});
double symmetryLoss(const TriMesh& mesh, const SymmetryPlane& plane = {});

// mean_i ||X_i - mean_{j in N_i} X_j||^2 over the face-induced neighbourhoods; isolated
// vertices contribute 0. `vertices` must match `mesh` in size (they may be a posed copy).
double laplacianLoss(
    const TriMesh& mesh,
    std::span<const Vec3> vertices,
    std::vector<Vec3>* gradient = nullptr);
double laplacianLoss(const TriMesh& mesh);

// Temporal edge-length preservation:
//   (1/|E|) sum_{(i,j) in E} (||X_i^t - X_j^t|| - ||X_i^{t-1} - X_j^{t-1}||)^2.
double dynamicRigidityLoss(
    const TriMesh& mesh,
    std::span<const Vec3> current,
    std::span<const Vec3> previous,
    std::vector<Vec3>* gradient = nullptr);

// Throws DimensionError when the two frames do not deform the same base mesh.
double dynamicRigidityLoss(const DeformedMesh& current, const DeformedMesh& previous);

} // namespace kinemesh
