#include "kinemesh/fit/frame_objective.h"

#include "kinemesh/common/error.h"
#include "kinemesh/deform/blend_skin.h"
#include "kinemesh/deform/regularizers.h"
#include "kinemesh/skeleton/forward_kinematics.h"
#include "kinemesh/skeleton/rotation.h"

#include <fmt/format.h>
#include <unsupported/Eigen/AutoDiff>

#include <array>

namespace kinemesh {

namespace {

using Ad = Eigen::AutoDiffScalar<Eigen::VectorXd>;
using AdVector = Eigen::Matrix<Ad, 3, 1>;

Ad variable(double value, Eigen::Index index, Eigen::Index count) {
  return Ad(value, count, index);
}

// Bone and root transforms at `params` with their derivatives: root rotation with respect
// to its rotation vector, bone rotations and translations with respect to the 4B angle and
// scale parameters.
struct ChainDerivatives {
  Eigen::Matrix3d root;
  std::array<Eigen::Matrix3d, 3> rootDerivatives;
  std::vector<Eigen::Matrix3d> rotations;
  std::vector<Vec3> translations;
  std::vector<std::vector<Eigen::Matrix3d>> rotationDerivatives; // [bone][param]
  std::vector<std::vector<Vec3>> translationDerivatives; // [bone][param]
};

ChainDerivatives differentiate(const Skeleton& skeleton, const Eigen::VectorXd& params) {
  const size_t bones = skeleton.boneCount();
  ChainDerivatives out;

  AdVector r;
  for (int k = 0; k < 3; ++k) {
    r(k) = variable(params(k), k, 3);
  }
  const Eigen::Matrix<Ad, 3, 3> rootAd = rotationFromVector<Ad>(r);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      out.root(i, j) = rootAd(i, j).value();
      for (int k = 0; k < 3; ++k) {
        out.rootDerivatives[k](i, j) = rootAd(i, j).derivatives()(k);
      }
    }
  }

  const auto local = static_cast<Eigen::Index>(4 * bones);
  std::vector<AdVector> angles(bones);
  std::vector<Ad> scales(bones);
  for (size_t b = 0; b < bones; ++b) {
    for (int k = 0; k < 3; ++k) {
      angles[b](k) = variable(params(6 + 3 * b + k), static_cast<Eigen::Index>(3 * b + k), local);
    }
    scales[b] = variable(params(6 + 3 * bones + b), static_cast<Eigen::Index>(3 * bones + b), local);
  }
  const auto chain =
      evaluateChain<Ad>(skeleton, std::span<const AdVector>(angles), std::span<const Ad>(scales));
  out.rotations.resize(bones);
  out.translations.resize(bones);
  out.rotationDerivatives.assign(bones, std::vector<Eigen::Matrix3d>(local, Eigen::Matrix3d::Zero()));
  out.translationDerivatives.assign(bones, std::vector<Vec3>(local, Vec3::Zero()));
  for (size_t b = 0; b < bones; ++b) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const Ad& e = chain.rotations[b](i, j);
        out.rotations[b](i, j) = e.value();
        if (e.derivatives().size() == local) {
          for (Eigen::Index p = 0; p < local; ++p) {
            out.rotationDerivatives[b][p](i, j) = e.derivatives()(p);
          }
        }
      }
      const Ad& e = chain.translations[b](i);
      out.translations[b](i) = e.value();
      if (e.derivatives().size() == local) {
        for (Eigen::Index p = 0; p < local; ++p) {
          out.translationDerivatives[b][p](i) = e.derivatives()(p);
        }
      }
    }
  }
  return out;
}

void addScaled(std::vector<Vec3>& into, const std::vector<Vec3>& term, double weight) {
  for (size_t i = 0; i < into.size(); ++i) {
    into[i] += weight * term[i];
  }
}

} // namespace

size_t frameParameterCount(size_t boneCount) {
  return 6 + 4 * boneCount;
}

Eigen::VectorXd packFrame(const MotionFrame& frame) {
  const size_t bones = frame.boneCount();
  Eigen::VectorXd p(frameParameterCount(bones));
  p.segment<3>(0) = rotationVectorFromQuaternion(frame.root.rotation);
  p.segment<3>(3) = frame.root.translation;
  for (size_t b = 0; b < bones; ++b) {
    p.segment<3>(6 + 3 * b) = frame.angles[b];
    p(6 + 3 * bones + b) = frame.boneScales[b];
  }
  return p;
}

MotionFrame unpackFrame(const Eigen::VectorXd& params, size_t boneCount) {
  if (static_cast<size_t>(params.size()) != frameParameterCount(boneCount)) {
    throw DimensionError(fmt::format(
        "parameter vector has {} entries, {} bones need {}",
        params.size(),
        boneCount,
        frameParameterCount(boneCount)));
  }
  MotionFrame frame;
  frame.root.rotation = quaternionFromVector(params.segment<3>(0));
  frame.root.translation = params.segment<3>(3);
  frame.angles.resize(boneCount);
  frame.boneScales.resize(boneCount);
  for (size_t b = 0; b < boneCount; ++b) {
    frame.angles[b] = params.segment<3>(6 + 3 * b);
    frame.boneScales[b] = params(6 + 3 * boneCount + b);
  }
  return frame;
}

FrameObjective::FrameObjective(
    const TriMesh& canonical,
    const Skeleton& skeleton,
    const SkinWeights& weights,
    const TriMesh& supervision,
    const SkinWeights& supervisionWeights,
    const FitConfig& config,
    std::span<const Vec3> previous,
    bool applySymmetry,
    ChamferMode mode)
    : canonical_(canonical),
      skeleton_(skeleton),
      weights_(weights),
      supervision_(supervision),
      supervisionWeights_(supervisionWeights),
      config_(config),
      previous_(previous.begin(), previous.end()),
      applySymmetry_(applySymmetry),
      mode_(mode),
      diagonal_(bboxDiagonal(canonical)) {
  if (supervision.vertexCount() == 0) {
    throw EmptyInputError("supervision mesh has no vertices");
  }
  if (weights.vertexCount() != canonical.vertexCount() || weights.boneCount() != skeleton.boneCount()) {
    throw DimensionError(fmt::format(
        "weights are {}x{}, canonical mesh has {} vertices and the skeleton {} bones",
        weights.vertexCount(),
        weights.boneCount(),
        canonical.vertexCount(),
        skeleton.boneCount()));
  }
  if (supervisionWeights.vertexCount() != supervision.vertexCount() ||
      supervisionWeights.boneCount() != skeleton.boneCount()) {
    throw DimensionError("supervision weights do not match the supervision mesh and skeleton");
  }
  if (!previous_.empty() && previous_.size() != canonical.vertexCount()) {
    throw DimensionError("previous frame does not match the canonical mesh");
  }
  predParts_ = partDecompose(weights);
  const PartDecomposition targetParts = partDecompose(supervisionWeights);
  if (mode == ChamferMode::Surface) {
    if (canonical.faceCount() == 0) {
      throw EmptyInputError("surface matching needs a canonical mesh with triangles");
    }
    targetSurface_.emplace(supervision.vertices(), supervision.faces(), targetParts);
  } else if (config.localWeight > 0.0) {
    targetCloud_.emplace(supervision.vertices(), targetParts);
  } else {
    targetCloud_.emplace(supervision.vertices());
  }
}

std::vector<Vec3> FrameObjective::deform(const Eigen::VectorXd& params) const {
  const MotionFrame frame = unpackFrame(params, skeleton_.boneCount());
  const auto chain = evaluateChain<double>(skeleton_, frame.angles, frame.boneScales);
  const Eigen::Matrix3d rootRotation = rotationFromVector<double>(params.segment<3>(0));
  return blendSkinVertices(
      canonical_.vertices(),
      weights_.matrix(),
      rootRotation,
      params.segment<3>(3),
      chain.rotations,
      chain.translations);
}

FrameMatches FrameObjective::match(std::span<const Vec3> deformed) const {
  FrameMatches m;
  const auto& target = supervision_.vertices();
  if (mode_ == ChamferMode::Surface) {
    const IndexedSurface pred(deformed, canonical_.faces(), predParts_);
    if (config_.globalWeight > 0.0) {
      m.global = globalSurfacePairs(pred, *targetSurface_);
    }
    if (config_.localWeight > 0.0) {
      m.local = localSurfacePairs(pred, *targetSurface_, weights_, supervisionWeights_);
    }
  } else if (config_.localWeight > 0.0) {
    const IndexedCloud pred(deformed, predParts_);
    if (config_.globalWeight > 0.0) {
      m.global = globalPairs(target, matchGlobal(pred, *targetCloud_));
    }
    m.local = localPairs(target, weights_, supervisionWeights_, matchLocal(pred, *targetCloud_));
  } else if (config_.globalWeight > 0.0) {
    m.global = globalPairs(target, matchGlobal(IndexedCloud(deformed), *targetCloud_));
  }
  if (applySymmetry_ && config_.symmetryWeight > 0.0) {
    m.symmetryPartners = symmetryPartners(deformed, config_.symmetryPlane);
  }
  return m;
}

LossTerms FrameObjective::lossAndVertexGradient(
    std::span<const Vec3> deformed,
    const FrameMatches& matches,
    std::vector<Vec3>* vertexGradient) const {
  const size_t n = deformed.size();
  std::vector<Vec3> term;
  std::vector<Vec3>* termGradient = vertexGradient != nullptr ? &term : nullptr;
  auto collect = [&](double weight) {
    if (vertexGradient != nullptr) {
      addScaled(*vertexGradient, term, weight);
      term.assign(n, Vec3::Zero());
    }
  };
  if (vertexGradient != nullptr) {
    vertexGradient->assign(n, Vec3::Zero());
    term.assign(n, Vec3::Zero());
  }

  LossTerms t;
  if (config_.globalWeight > 0.0) {
    t.global = pairLoss(matches.global, deformed, termGradient);
    collect(config_.globalWeight);
  }
  if (config_.localWeight > 0.0) {
    t.local = pairLoss(matches.local, deformed, termGradient);
    collect(config_.localWeight);
  }
  if (applySymmetry_ && config_.symmetryWeight > 0.0) {
    t.symmetry = symmetryLoss(deformed, config_.symmetryPlane, matches.symmetryPartners, termGradient);
    collect(config_.symmetryWeight);
  }
  if (config_.laplacianWeight > 0.0) {
    t.laplacian = laplacianLoss(canonical_, deformed, termGradient);
    collect(config_.laplacianWeight);
  }
  if (config_.rigidityWeight > 0.0 && !previous_.empty()) {
    t.rigidity = dynamicRigidityLoss(canonical_, deformed, previous_, termGradient);
    collect(config_.rigidityWeight);
  }
  t.total = config_.globalWeight * t.global + config_.localWeight * t.local +
      config_.symmetryWeight * t.symmetry + config_.laplacianWeight * t.laplacian +
      config_.rigidityWeight * t.rigidity;
  return t;
}

LossTerms FrameObjective::evaluate(
    const Eigen::VectorXd& params,
    const FrameMatches& matches,
    Eigen::VectorXd* gradient) const {
  const std::vector<Vec3> deformed = deform(params);
  if (gradient == nullptr) {
    return lossAndVertexGradient(deformed, matches, nullptr);
  }
  std::vector<Vec3> g;
  const LossTerms terms = lossAndVertexGradient(deformed, matches, &g);

  const size_t bones = skeleton_.boneCount();
  gradient->setZero(static_cast<Eigen::Index>(parameterCount()));


  const ChainDerivatives d = differentiate(skeleton_, params);
  const auto& rest = canonical_.vertices();
  const Eigen::MatrixXd& w = weights_.matrix();
  const Vec3 rootTranslation = params.segment<3>(3);

  // X = R0 u + t0 with u the blended point before the root transform.
  Eigen::Matrix3d rootGrad = Eigen::Matrix3d::Zero();
  Vec3 translationGrad = Vec3::Zero();
  std::vector<Eigen::Matrix3d> rotationGrad(bones, Eigen::Matrix3d::Zero());
  std::vector<Vec3> boneTranslationGrad(bones, Vec3::Zero());
  for (size_t i = 0; i < deformed.size(); ++i) {
    const Vec3 pre = d.root.transpose() * (deformed[i] - rootTranslation);
    rootGrad += g[i] * pre.transpose();
    translationGrad += g[i];
    const Vec3 h = d.root.transpose() * g[i];
    for (size_t b = 0; b < bones; ++b) {
      const double wb = w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
      if (wb == 0.0) {
        continue;
      }
      rotationGrad[b] += wb * h * rest[i].transpose();
      boneTranslationGrad[b] += wb * h;
    }
  }
  for (int k = 0; k < 3; ++k) {
    (*gradient)(k) = (rootGrad.array() * d.rootDerivatives[k].array()).sum();
  }
  gradient->segment<3>(3) = translationGrad;
  for (size_t p = 0; p < 4 * bones; ++p) {
    double sum = 0.0;
    for (size_t b = 0; b < bones; ++b) {
      sum += (rotationGrad[b].array() * d.rotationDerivatives[b][p].array()).sum() +
          boneTranslationGrad[b].dot(d.translationDerivatives[b][p]);
    }
    (*gradient)(static_cast<Eigen::Index>(6 + p)) = sum;
  }
  return terms;
}

LossTerms FrameObjective::evaluate(const Eigen::VectorXd& params) const {
  const std::vector<Vec3> deformed = deform(params);
  return lossAndVertexGradient(deformed, match(deformed), nullptr);
}

Eigen::VectorXd FrameObjective::gradient(const Eigen::VectorXd& params) const {
  Eigen::VectorXd g;
  evaluate(params, match(deform(params)), &g);
  return g;
}

std::vector<Eigen::MatrixXd> FrameObjective::vertexJacobians(const Eigen::VectorXd& params) const {
  const size_t bones = skeleton_.boneCount();
  const auto count = static_cast<Eigen::Index>(parameterCount());
  const ChainDerivatives d = differentiate(skeleton_, params);
  const auto& rest = canonical_.vertices();
  const Eigen::MatrixXd& w = weights_.matrix();
  std::vector<Eigen::MatrixXd> out(rest.size());
  const auto n = static_cast<std::ptrdiff_t>(rest.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    Eigen::MatrixXd& jac = out[i];
    jac.setZero(3, count);
    Vec3 pre = rest[i];
    for (size_t b = 0; b < bones; ++b) {
      const double wb = w(i, static_cast<Eigen::Index>(b));
      if (wb == 0.0) {
        continue;
      }
      pre += wb * ((d.rotations[b] - Eigen::Matrix3d::Identity()) * rest[i] + d.translations[b]);
      for (size_t p = 0; p < 4 * bones; ++p) {
        jac.col(static_cast<Eigen::Index>(6 + p)) +=
            wb * (d.rotationDerivatives[b][p] * rest[i] + d.translationDerivatives[b][p]);
      }
    }
    jac.rightCols(static_cast<Eigen::Index>(4 * bones)) =
        d.root * jac.rightCols(static_cast<Eigen::Index>(4 * bones));
    for (int k = 0; k < 3; ++k) {
      jac.col(k) = d.rootDerivatives[k] * pre;
    }
    jac.middleCols<3>(3).setIdentity();
  }
  return out;
}

Eigen::MatrixXd FrameObjective::gaussNewtonHessian(
    const Eigen::VectorXd& params,
    const FrameMatches& matches) const {
  const std::vector<Vec3> deformed = deform(params);
  const std::vector<Eigen::MatrixXd> jac = vertexJacobians(params);
  const auto count = static_cast<Eigen::Index>(parameterCount());
  const size_t n = deformed.size();

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(count, count);
  if (applySymmetry_ && config_.symmetryWeight > 0.0) {
    const Vec3& normal = config_.symmetryPlane.normal();
    const Eigen::Matrix3d reflection = Eigen::Matrix3d::Identity() - 2.0 * normal * normal.transpose();
    const double c = config_.symmetryWeight / static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
      const Eigen::MatrixXd r = jac[matches.symmetryPartners[i]] - reflection * jac[i];
      h.noalias() += c * r.transpose() * r;
    }
  }
  if (config_.laplacianWeight > 0.0) {
    const double c = config_.laplacianWeight / static_cast<double>(n);
    const auto& neighbors = canonical_.neighbors();
    for (size_t i = 0; i < n; ++i) {
      if (neighbors[i].empty()) {
        continue;
      }
      Eigen::MatrixXd r = jac[i];
      const double inv = 1.0 / static_cast<double>(neighbors[i].size());
      for (const int j : neighbors[i]) {
        r -= inv * jac[j];
      }
      h.noalias() += c * r.transpose() * r;
    }
  }
  if (config_.rigidityWeight > 0.0 && !previous_.empty()) {
    const auto& edges = canonical_.edges();
    const double c = config_.rigidityWeight / static_cast<double>(edges.size());
    for (const auto& [a, b] : edges) {
      const Vec3 e = deformed[a] - deformed[b];
      const double length = e.norm();
      if (length == 0.0) {
        continue;
      }
      const Eigen::RowVectorXd r = (e / length).transpose() * (jac[a] - jac[b]);
      h.noalias() += c * r.transpose() * r;
    }
  }
  h *= 2.0;
  addPairHessian(matches.global, jac, h, config_.globalWeight);
  addPairHessian(matches.local, jac, h, config_.localWeight);
  return h;
}

Eigen::VectorXd FrameObjective::parameterScales() const {
  Eigen::VectorXd s = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(parameterCount()));
  s.segment<3>(3).setConstant(diagonal_);
  return s;
}

} // namespace kinemesh
