#include "kinemesh/fit/residual_pairs.h"

#include "kinemesh/common/error.h"
#include "kinemesh/common/parallel.h"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

namespace kinemesh {

namespace {

const std::vector<int> kNoMembers;

ResidualPair vertexPair(int vertex, const Vec3& target, double weight) {
  return {{vertex, vertex, vertex}, Vec3(1.0, 0.0, 0.0), target, weight};
}

double interpolate(const SkinWeights& w, const SurfacePoint& p, int bone) {
  double value = 0.0;
  for (int j = 0; j < 3; ++j) {
    value += p.barycentric(j) * w(p.corners[j], bone);
  }
  return value;
}

// Unit direction of a surface pair's residual, or the normal of its triangle when the
// residual vanishes.
Vec3 residualDirection(const Vec3& residual, const Face& triangle, std::span<const Vec3> vertices) {
  const Vec3& a = vertices[triangle[0]];
  const Vec3 n = (vertices[triangle[1]] - a).cross(vertices[triangle[2]] - a);
  const double length = residual.norm();
  if (length > 1e-9 * std::sqrt(n.norm())) {
    return residual / length;
  }
  return n.norm() > 0.0 ? Vec3(n.normalized()) : Vec3::Zero();
}

} // namespace

std::vector<ResidualPair> globalPairs(std::span<const Vec3> target, const ChamferMatches& matches) {
  std::vector<ResidualPair> pairs;
  pairs.reserve(matches.predToTarget.size() + matches.targetToPred.size());
  const double forward = 1.0 / static_cast<double>(matches.predToTarget.size());
  for (size_t i = 0; i < matches.predToTarget.size(); ++i) {
    pairs.push_back(vertexPair(static_cast<int>(i), target[matches.predToTarget[i]], forward));
  }
  const double backward = 1.0 / static_cast<double>(matches.targetToPred.size());
  for (size_t m = 0; m < matches.targetToPred.size(); ++m) {
    pairs.push_back(vertexPair(matches.targetToPred[m], target[m], backward));
  }
  return pairs;
}

std::vector<ResidualPair> localPairs(
    std::span<const Vec3> target,
    const SkinWeights& predWeights,
    const SkinWeights& targetWeights,
    std::span<const PartMatches> parts) {
  std::vector<ResidualPair> pairs;
  if (parts.empty()) {
    return pairs;
  }
  const double perPart = 1.0 / static_cast<double>(parts.size());
  for (const auto& part : parts) {
    const int k = part.bone;
    const double forward = perPart / static_cast<double>(part.pred.size());
    for (size_t a = 0; a < part.pred.size(); ++a) {
      const int x = part.pred[a];
      const int y = part.predToTarget[a];
      pairs.push_back(vertexPair(x, target[y], forward * predWeights(x, k) * targetWeights(y, k)));
    }
    const double backward = perPart / static_cast<double>(part.target.size());
    for (size_t a = 0; a < part.target.size(); ++a) {
      const int y = part.target[a];
      const int x = part.targetToPred[a];
      pairs.push_back(vertexPair(x, target[y], backward * predWeights(x, k) * targetWeights(y, k)));
    }
  }
  return pairs;
}

IndexedSurface::IndexedSurface(
    std::span<const Vec3> vertices,
    std::span<const Face> faces,
    const PartDecomposition& parts)
    : vertices_(vertices.begin(), vertices.end()),
      surface_(vertices, std::vector<Face>(faces.begin(), faces.end())) {
  if (faces.empty()) {
    throw EmptyInputError("surface chamfer needs a mesh with triangles");
  }
  if (parts.labels.size() != vertices.size()) {
    throw DimensionError("part labels do not cover the surface vertices");
  }
  members_.resize(parts.boneCount);
  for (size_t i = 0; i < parts.labels.size(); ++i) {
    members_[parts.labels[i]].push_back(static_cast<int>(i));
  }
  std::vector<std::vector<Face>> partFaces(parts.boneCount);
  for (const auto& f : faces) {
    for (int j = 0; j < 3; ++j) {
      const int label = parts.labels[f[j]];
      if (partFaces[label].empty() || partFaces[label].back() != f) {
        partFaces[label].push_back(f);
      }
    }
  }
  parts_.resize(parts.boneCount);
  for (size_t b = 0; b < parts.boneCount; ++b) {
    if (!members_[b].empty() && !partFaces[b].empty()) {
      parts_[b].emplace(vertices, std::move(partFaces[b]));
    }
  }
}

bool IndexedSurface::hasPart(int bone) const {
  return bone >= 0 && static_cast<size_t>(bone) < parts_.size() && parts_[bone].has_value();
}

const TriangleBvh& IndexedSurface::partSurface(int bone) const {
  if (!hasPart(bone)) {
    throw std::out_of_range(fmt::format("surface has no part {}", bone));
  }
  return *parts_[bone];
}

const std::vector<int>& IndexedSurface::partMembers(int bone) const {
  return hasPart(bone) ? members_[bone] : kNoMembers;
}

std::vector<ResidualPair> globalSurfacePairs(const IndexedSurface& pred, const IndexedSurface& target) {
  const auto& x = pred.vertices();
  const auto& y = target.vertices();
  std::vector<ResidualPair> pairs(x.size() + y.size());
  const double forward = 1.0 / static_cast<double>(x.size());
  const double backward = 1.0 / static_cast<double>(y.size());
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto m = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const SurfacePoint p = target.surface().closestPoint(x[i]);
    pairs[i] = vertexPair(static_cast<int>(i), p.point, forward);
    pairs[i].normal = residualDirection(x[i] - p.point, p.corners, y);
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < m; ++j) {
    const SurfacePoint p = pred.surface().closestPoint(y[j]);
    pairs[n + j] = {p.corners, p.barycentric, y[j], backward, residualDirection(p.point - y[j], p.corners, x)};
  }
  return pairs;
}

std::vector<ResidualPair> localSurfacePairs(
    const IndexedSurface& pred,
    const IndexedSurface& target,
    const SkinWeights& predWeights,
    const SkinWeights& targetWeights) {
  std::vector<int> common;
  const size_t bones = std::min(pred.boneCount(), target.boneCount());
  for (size_t k = 0; k < bones; ++k) {
    if (pred.hasPart(static_cast<int>(k)) && target.hasPart(static_cast<int>(k))) {
      common.push_back(static_cast<int>(k));
    }
  }
  std::vector<ResidualPair> pairs;
  if (common.empty()) {
    return pairs;
  }
  const double perPart = 1.0 / static_cast<double>(common.size());
  for (const int k : common) {
    const auto& xs = pred.partMembers(k);
    const auto& ys = target.partMembers(k);
    const double forward = perPart / static_cast<double>(xs.size());
    const double backward = perPart / static_cast<double>(ys.size());
    for (const int x : xs) {
      const SurfacePoint p = target.partSurface(k).closestPoint(pred.vertices()[x]);
      pairs.push_back(vertexPair(x, p.point, forward * predWeights(x, k) * interpolate(targetWeights, p, k)));
      pairs.back().normal = residualDirection(pred.vertices()[x] - p.point, p.corners, target.vertices());
    }
    for (const int y : ys) {
      const Vec3& point = target.vertices()[y];
      const SurfacePoint p = pred.partSurface(k).closestPoint(point);
      pairs.push_back(
          {p.corners,
           p.barycentric,
           point,
           backward * interpolate(predWeights, p, k) * targetWeights(y, k),
           residualDirection(p.point - point, p.corners, pred.vertices())});
    }
  }
  return pairs;
}

double pairLoss(
    std::span<const ResidualPair> pairs,
    std::span<const Vec3> vertices,
    std::vector<Vec3>* gradient) {
  if (gradient != nullptr && gradient->empty()) {
    gradient->assign(vertices.size(), Vec3::Zero());
  }
  std::vector<double> terms(pairs.size());
  for (size_t p = 0; p < pairs.size(); ++p) {
    const auto& pair = pairs[p];
    Vec3 r = -pair.target;
    for (int j = 0; j < 3; ++j) {
      r += pair.barycentric(j) * vertices[pair.corners[j]];
    }
    terms[p] = pair.weight * r.squaredNorm();
    if (gradient != nullptr) {
      for (int j = 0; j < 3; ++j) {
        if (pair.barycentric(j) != 0.0) {
          (*gradient)[pair.corners[j]] += 2.0 * pair.weight * pair.barycentric(j) * r;
        }
      }
    }
  }
  return stableSum(terms);
}

void addPairHessian(
    std::span<const ResidualPair> pairs,
    std::span<const Eigen::MatrixXd> vertexJacobians,
    Eigen::MatrixXd& hessian,
    double scale) {
  Eigen::MatrixXd j;
  for (const auto& pair : pairs) {
    if (pair.weight == 0.0) {
      continue;
    }
    const double w = 2.0 * scale * pair.weight;
    if (pair.corners[0] == pair.corners[1] && pair.corners[1] == pair.corners[2]) {
      j = vertexJacobians[pair.corners[0]];
    } else {
      j = pair.barycentric(0) * vertexJacobians[pair.corners[0]] +
          pair.barycentric(1) * vertexJacobians[pair.corners[1]] +
          pair.barycentric(2) * vertexJacobians[pair.corners[2]];
    }
    if (pair.normal.isZero()) {
      hessian.noalias() += w * j.transpose() * j;
    } else {
      const Eigen::RowVectorXd row = pair.normal.transpose() * j;
      hessian.noalias() += w * row.transpose() * row;
    }
  }
}

} // namespace kinemesh
