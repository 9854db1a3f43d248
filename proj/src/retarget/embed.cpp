#include "kinemesh/retarget/embed.h"

#include "kinemesh/common/error.h"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace kinemesh {

namespace {

constexpr int kSegmentSamples = 8;

struct Placement {
  std::vector<int> voxels; // per joint
  double cost = std::numeric_limits<double>::infinity();
};

class Placer {
 public:
  Placer(const Skeleton& reference, const InteriorField& field, const EmbedOptions& options)
      : reference_(reference), field_(field), options_(options) {}

  Placement place(const std::vector<Vec3>& anchors, double scale) const {
    const size_t joints = reference_.jointCount();
    const double radius = options_.searchRadius * field_.voxelSize();
    std::vector<std::vector<int>> candidates(joints);
    for (size_t j = 0; j < joints; ++j) {
      candidates[j] = candidatesNear(anchors[j], radius);
      if (candidates[j].empty()) {
        return {};
      }
    }

    // best[j][c]: cheapest cost of the subtree of j with j at candidates[j][c].
    std::vector<std::vector<double>> best(joints);
    // choice[k][c]: candidate of child k when its parent sits at candidate c.
    std::vector<std::vector<int>> choice(joints);
    const auto& order = reference_.order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int j = *it;
      best[j].resize(candidates[j].size());
      for (size_t c = 0; c < candidates[j].size(); ++c) {
        best[j][c] = unary(candidates[j][c], anchors[j], radius);
      }
      for (const int k : reference_.children()[j]) {
        choice[k].assign(candidates[j].size(), -1);
        const double restLength = reference_.restLengths()[reference_.jointBone(k)];
        const auto count = static_cast<std::ptrdiff_t>(candidates[j].size());
#pragma omp parallel for schedule(dynamic, 16)
        for (std::ptrdiff_t c = 0; c < count; ++c) {
          const Vec3 from = field_.center(candidates[j][c]);
          double lowest = std::numeric_limits<double>::infinity();
          int arg = -1;
          for (size_t d = 0; d < candidates[k].size(); ++d) {
            const Vec3 to = field_.center(candidates[k][d]);
            const double partial = best[k][d] + proportion(from, to, scale * restLength);
            if (partial >= lowest) {
              continue;
            }
            const double total = partial + exit(from, to);
            if (total < lowest) {
              lowest = total;
              arg = static_cast<int>(d);
            }
          }
          best[j][c] += lowest;
          choice[k][c] = arg;
        }
      }
    }

    const int root = reference_.root();
    Placement out;
    std::vector<int> picked(joints, -1);
    const auto rootBest = std::min_element(best[root].begin(), best[root].end());
    picked[root] = static_cast<int>(rootBest - best[root].begin());
    out.cost = *rootBest;
    for (const int j : order) {
      for (const int k : reference_.children()[j]) {
        picked[k] = choice[k][picked[j]];
      }
    }
    out.voxels.resize(joints);
    for (size_t j = 0; j < joints; ++j) {
      out.voxels[j] = candidates[j][picked[j]];
    }
    return out;
  }

  // First joint whose aligned position has no interior voxel in reach, or -1.
  int unreachableJoint(const std::vector<Vec3>& anchors) const {
    const double radius = options_.searchRadius * field_.voxelSize();
    for (const int j : reference_.order()) {
      if (candidatesNear(anchors[j], radius).empty()) {
        return j;
      }
    }
    return -1;
  }

 private:
  std::vector<int> candidatesNear(const Vec3& p, double radius) const {
    std::vector<int> out;
    const double h = field_.voxelSize();
    const auto& dims = field_.dims();
    std::array<int, 3> lo{};
    std::array<int, 3> hi{};
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(0, static_cast<int>(std::floor((p(a) - radius - field_.origin()(a)) / h)));
      hi[a] = std::min(dims[a] - 1, static_cast<int>(std::floor((p(a) + radius - field_.origin()(a)) / h)));
    }
    for (int z = lo[2]; z <= hi[2]; ++z) {
      for (int y = lo[1]; y <= hi[1]; ++y) {
        for (int x = lo[0]; x <= hi[0]; ++x) {
          const int i = field_.linear(x, y, z);
          if (field_.isInterior(i) && (field_.center(i) - p).norm() <= radius) {
            out.push_back(i);
          }
        }
      }
    }
    return out;
  }

  double unary(int voxel, const Vec3& anchor, double radius) const {
    const double prior = (field_.center(voxel) - anchor).squaredNorm() / (radius * radius);
    const double centering = 1.0 - field_.distance(voxel) / field_.maxDistance();
    return options_.priorWeight * prior + options_.centeringWeight * centering;
  }

  double proportion(const Vec3& from, const Vec3& to, double expectedLength) const {
    if (!(expectedLength > 0.0)) {
      return 0.0;
    }
    const double ratio = (to - from).norm() / expectedLength - 1.0;
    return options_.proportionWeight * ratio * ratio;
  }

  double exit(const Vec3& from, const Vec3& to) const {
    int outside = 0;
    for (int s = 1; s < kSegmentSamples; ++s) {
      const double t = static_cast<double>(s) / kSegmentSamples;
      if (!field_.isInterior(from + t * (to - from))) {
        ++outside;
      }
    }
    return options_.exitWeight * outside / (kSegmentSamples - 1);
  }

  const Skeleton& reference_;
  const InteriorField& field_;
  const EmbedOptions& options_;
};

} // namespace

Embedding embedSkeleton(const Skeleton& reference, const InteriorField& field, const EmbedOptions& options) {
  if (options.searchRadius < 1 || options.scaleSteps < 1 || !(options.minScaleFraction > 0.0) ||
      options.maxScaleFraction < options.minScaleFraction) {
    throw std::invalid_argument("invalid embedding options");
  }
  const BoundingBox joints = boundingBox(reference.joints());
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const int i : field.interiorVoxels()) {
    const Vec3 c = field.center(i);
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }
  const double half = 0.5 * field.voxelSize();
  const BoundingBox interior{lo - Vec3::Constant(half), hi + Vec3::Constant(half)};
  const double jointExtent = joints.extent().maxCoeff();
  const double baseScale = jointExtent > 0.0 ? interior.extent().maxCoeff() / jointExtent : 1.0;

  const Placer placer(reference, field, options);
  Embedding best;
  best.cost = std::numeric_limits<double>::infinity();
  std::vector<int> bestVoxels;
  std::vector<Vec3> firstAnchors;
  for (int step = 0; step < options.scaleSteps; ++step) {
    const double fraction = options.scaleSteps == 1
        ? options.maxScaleFraction
        : options.minScaleFraction +
            (options.maxScaleFraction - options.minScaleFraction) * step / (options.scaleSteps - 1);
    const double scale = baseScale * fraction;
    std::vector<Vec3> anchors;
    anchors.reserve(reference.jointCount());
    for (const Vec3& j : reference.joints()) {
      anchors.push_back(interior.center() + scale * (j - joints.center()));
    }
    if (firstAnchors.empty()) {
      firstAnchors = anchors;
    }
    const Placement placement = placer.place(anchors, scale);
    spdlog::debug("embedding scale {:.4f}: cost {:.6g}", scale, placement.cost);
    if (placement.cost < best.cost) {
      best.cost = placement.cost;
      best.scale = scale;
      bestVoxels = placement.voxels;
    }
  }
  if (bestVoxels.empty()) {
    const int joint = placer.unreachableJoint(firstAnchors);
    const size_t named = joint < 0 ? 0 : static_cast<size_t>(joint);
    const auto& names = reference.names();
    const std::string label = named < names.size() && !names[named].empty() ? names[named] : std::to_string(named);
    throw EmbeddingError(
        fmt::format(
            "no interior voxel within {} voxels of joint {}; supply the target skeleton manually",
            options.searchRadius,
            label),
        named);
  }
  std::vector<Vec3> placed;
  placed.reserve(bestVoxels.size());
  for (const int v : bestVoxels) {
    placed.push_back(field.center(v));
  }
  best.skeleton = reference.withJoints(std::move(placed));
  return best;
}

} // namespace kinemesh
