#include "kinemesh/skinning/heat_skinning.h"

#include "kinemesh/common/error.h"
#include "kinemesh/geometry/triangle_bvh.h"

#include <Eigen/SparseCholesky>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace kinemesh {

namespace {

std::vector<int> connectedComponents(const TriMesh& mesh) {
  std::vector<int> parent(mesh.vertexCount());
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (const auto& [a, b] : mesh.edges()) {
    const int ra = find(a);
    const int rb = find(b);
    if (ra != rb) {
      parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  }
  std::vector<int> component(mesh.vertexCount());
  for (size_t v = 0; v < component.size(); ++v) {
    component[v] = find(static_cast<int>(v));
  }
  return component;
}

struct BoneSegment {
  Eigen::Vector3d head;
  Eigen::Vector3d tail;
};

std::vector<BoneSegment> boneSegments(const Skeleton& skeleton) {
  std::vector<BoneSegment> segments;
  for (size_t b = 0; b < skeleton.boneCount(); ++b) {
    const int j = skeleton.boneJoint(static_cast<int>(b));
    segments.push_back({skeleton.joints()[skeleton.parents()[j]], skeleton.joints()[j]});
  }
  return segments;
}

int nearestSegment(const Eigen::Vector3d& p, const std::vector<BoneSegment>& segments) {
  int best = 0;
  double bestDistance = std::numeric_limits<double>::infinity();
  for (size_t b = 0; b < segments.size(); ++b) {
    const double d = pointSegmentDistance(p, segments[b].head, segments[b].tail);
    if (d < bestDistance) {
      bestDistance = d;
      best = static_cast<int>(b);
    }
  }
  return best;
}

} // namespace

double pointSegmentDistance(
    const Eigen::Vector3d& p,
    const Eigen::Vector3d& a,
    const Eigen::Vector3d& b,
    Eigen::Vector3d* closest) {
  const Eigen::Vector3d ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Eigen::Vector3d q = a + t * ab;
  if (closest != nullptr) {
    *closest = q;
  }
  return (p - q).norm();
}

Eigen::SparseMatrix<double> cotangentLaplacian(const TriMesh& mesh, double minWeight) {
  const auto& x = mesh.vertices();
  std::vector<double> weights(mesh.edges().size(), 0.0);
  const auto edgeIndex = [&](int a, int b) {
    const Edge e{std::min(a, b), std::max(a, b)};
    const auto it = std::lower_bound(mesh.edges().begin(), mesh.edges().end(), e);
    return static_cast<size_t>(it - mesh.edges().begin());
  };
  for (const auto& f : mesh.faces()) {
    for (int k = 0; k < 3; ++k) {
      const int i = f[k];
      const int j = f[(k + 1) % 3];
      const int o = f[(k + 2) % 3];
      const Eigen::Vector3d u = x[i] - x[o];
      const Eigen::Vector3d v = x[j] - x[o];
      const double cross = u.cross(v).norm();
      if (cross > 0.0) {
        weights[edgeIndex(i, j)] += 0.5 * u.dot(v) / cross;
      }
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(4 * weights.size());
  for (size_t e = 0; e < weights.size(); ++e) {
    const auto [a, b] = mesh.edges()[e];
    const double w = std::max(weights[e], minWeight);
    triplets.emplace_back(a, b, -w);
    triplets.emplace_back(b, a, -w);
    triplets.emplace_back(a, a, w);
    triplets.emplace_back(b, b, w);
  }
  const auto n = static_cast<Eigen::Index>(mesh.vertexCount());
  Eigen::SparseMatrix<double> laplacian(n, n);
  laplacian.setFromTriplets(triplets.begin(), triplets.end());
  return laplacian;
}

Eigen::VectorXd lumpedVertexAreas(const TriMesh& mesh) {
  Eigen::VectorXd areas = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.vertexCount()));
  const auto& x = mesh.vertices();
  for (const auto& f : mesh.faces()) {
    const double area = 0.5 * (x[f[1]] - x[f[0]]).cross(x[f[2]] - x[f[0]]).norm();
    for (const int v : f) {
      areas[v] += area / 3.0;
    }
  }
  return areas;
}

BoneHeatSources boneHeatSources(
    const TriMesh& mesh,
    const Skeleton& skeleton,
    const HeatSkinningOptions& options) {
  const auto segments = boneSegments(skeleton);
  const size_t n = mesh.vertexCount();
  const size_t boneCount = segments.size();
  const TriangleBvh bvh(mesh);
  const bool open = !mesh.isClosed();
  const double minDistance = 1e-12 * std::max(bboxDiagonal(mesh), 1e-300);

  BoneHeatSources out;
  out.heat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  out.sources = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(boneCount));
  out.nearestBone.assign(n, -1);

  std::vector<double> distance(boneCount);
  std::vector<bool> visible(boneCount);
  for (size_t v = 0; v < n; ++v) {
    const auto& p = mesh.vertex(v);
    bool anyVisible = false;
    for (size_t b = 0; b < boneCount; ++b) {
      Eigen::Vector3d q;
      distance[b] = pointSegmentDistance(p, segments[b].head, segments[b].tail, &q);
      visible[b] = !bvh.segmentHits(p, q, static_cast<int>(v));
      anyVisible = anyVisible || visible[b];
    }
    if (!anyVisible) {
      if (!open) {
        continue;
      }
      std::fill(visible.begin(), visible.end(), true);
    }
    double best = std::numeric_limits<double>::infinity();
    for (size_t b = 0; b < boneCount; ++b) {
      if (visible[b] && distance[b] < best) {
        best = distance[b];
        out.nearestBone[v] = static_cast<int>(b);
      }
    }
    std::vector<int> tied;
    for (size_t b = 0; b < boneCount; ++b) {
      if (visible[b] && distance[b] <= best * (1.0 + 1e-8)) {
        tied.push_back(static_cast<int>(b));
      }
    }
    const double d = std::max(best, minDistance);
    out.heat[v] = options.heatCoefficient / (d * d);
    for (const int b : tied) {
      out.sources(v, b) = 1.0 / static_cast<double>(tied.size());
    }
  }
  return out;
}

SkinWeights heatDiffusionSkinning(
    const TriMesh& mesh,
    const Skeleton& skeleton,
    const HeatSkinningOptions& options) {
  const size_t n = mesh.vertexCount();
  const size_t boneCount = skeleton.boneCount();
  if (n < 4) {
    throw DimensionError(fmt::format("heat skinning needs at least 4 vertices, got {}", n));
  }
  if (boneCount == 0) {
    throw DimensionError("heat skinning needs at least one bone");
  }

  const auto sources = boneHeatSources(mesh, skeleton, options);
  const Eigen::VectorXd areas = lumpedVertexAreas(mesh);
  const Eigen::VectorXd screen = areas.cwiseProduct(sources.heat);

  // Components without any screened vertex make the system singular.
  const auto component = connectedComponents(mesh);
  std::vector<bool> sourced(n, false);
  for (size_t v = 0; v < n; ++v) {
    if (screen[v] > 0.0) {
      sourced[component[v]] = true;
    }
  }
  std::vector<int> solveIndex(n, -1);
  int solveCount = 0;
  size_t stranded = 0;
  for (size_t v = 0; v < n; ++v) {
    if (sourced[component[v]]) {
      solveIndex[v] = solveCount++;
    } else {
      ++stranded;
    }
  }

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(boneCount));
  if (solveCount > 0) {
    const Eigen::SparseMatrix<double> laplacian = cotangentLaplacian(mesh, options.minCotangentWeight);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<size_t>(laplacian.nonZeros()) + n);
    for (int k = 0; k < laplacian.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(laplacian, k); it; ++it) {
        const int r = solveIndex[it.row()];
        const int c = solveIndex[it.col()];
        if (r >= 0 && c >= 0) {
          triplets.emplace_back(r, c, it.value());
        }
      }
    }
    for (size_t v = 0; v < n; ++v) {
      if (solveIndex[v] >= 0) {
        triplets.emplace_back(solveIndex[v], solveIndex[v], screen[v]);
      }
    }
    Eigen::SparseMatrix<double> system(solveCount, solveCount);
    system.setFromTriplets(triplets.begin(), triplets.end());

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(system);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("bone heat system factorization failed");
    }
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(solveCount, static_cast<Eigen::Index>(boneCount));
    for (size_t v = 0; v < n; ++v) {
      if (solveIndex[v] >= 0) {
        rhs.row(solveIndex[v]) = screen[v] * sources.sources.row(static_cast<Eigen::Index>(v));
      }
    }
    const Eigen::MatrixXd solution = solver.solve(rhs);
    if (solver.info() != Eigen::Success || !solution.allFinite()) {
      throw NumericalError("bone heat solve failed");
    }
    for (size_t v = 0; v < n; ++v) {
      if (solveIndex[v] >= 0) {
        w.row(static_cast<Eigen::Index>(v)) = solution.row(solveIndex[v]);
      }
    }
  }

  const auto segments = boneSegments(skeleton);
  w = w.cwiseMax(0.0);
  for (size_t v = 0; v < n; ++v) {
    const auto row = static_cast<Eigen::Index>(v);
    const double sum = w.row(row).sum();
    if (solveIndex[v] >= 0 && sum > 0.0) {
      w.row(row) /= sum;
    } else {
      w.row(row).setZero();
      w(row, nearestSegment(mesh.vertex(v), segments)) = 1.0;
    }
  }
  if (stranded > 0) {
    spdlog::warn(
        "{} vertices lie in mesh components without a visible bone; bound to the nearest bone",
        stranded);
  }
  return SkinWeights(std::move(w));
}

} // namespace kinemesh
