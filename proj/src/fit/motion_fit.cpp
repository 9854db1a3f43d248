#include "kinemesh/fit/motion_fit.h"

#include "kinemesh/common/error.h"
#include "kinemesh/deform/blend_skin.h"
#include "kinemesh/geometry/kd_tree.h"
#include "kinemesh/skeleton/forward_kinematics.h"
#include "kinemesh/skeleton/rotation.h"
#include "kinemesh/skinning/heat_skinning.h"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <random>

namespace kinemesh {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEpsilon = 1e-12;
constexpr int kConvergenceWindow = 20;
// Largest Levenberg-Marquardt step per parameter, in units of the parameter scale.
constexpr double kMaxStep = 0.2;
// Fraction of the squared bounding-box diagonal below which the objective counts as zero.
constexpr double kNegligibleLoss = 1e-24;

void checkFinite(const LossTerms& t, int frameIndex) {
  const std::pair<const char*, double> terms[] = {
      {"global chamfer", t.global},
      {"local chamfer", t.local},
      {"symmetry", t.symmetry},
      {"laplacian", t.laplacian},
      {"rigidity", t.rigidity},
  };
  for (const auto& [name, value] : terms) {
    if (!std::isfinite(value)) {
      throw NumericalError(fmt::format("frame {}: {} loss is not finite", frameIndex, name));
    }
  }
}

void projectScales(Eigen::VectorXd& params, size_t boneCount, const ScaleBounds& bounds) {
  auto scales = params.tail(static_cast<Eigen::Index>(boneCount));
  for (Eigen::Index b = 0; b < scales.size(); ++b) {
    scales(b) = bounds.clamp(scales(b));
  }
}

double seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

FrameSolve minimizeLevenbergMarquardt(
    const FrameObjective& objective,
    const Eigen::VectorXd& initial,
    const FitConfig& config,
    size_t boneCount,
    int frameIndex) {
  const Eigen::VectorXd scale = objective.parameterScales();
  FrameSolve s;
  s.params = initial;
  projectScales(s.params, boneCount, config.scaleBounds);

  FrameMatches matches = objective.match(objective.deform(s.params));
  Eigen::VectorXd grad;
  s.terms = objective.evaluate(s.params, matches, &grad);
  checkFinite(s.terms, frameIndex);
  s.history.push_back(s.terms.total);
  Eigen::MatrixXd hessian = objective.gaussNewtonHessian(s.params, matches);

  double damping = config.initialDamping;
  int stalled = 0;
  const double negligible = kNegligibleLoss * objective.lossScale();
  while (s.iterations < config.maxIters && s.terms.total > negligible) {
    const Eigen::VectorXd diagonal = hessian.diagonal();
    // Parameters the objective does not see (a leaf bone's scale) still need a pivot.
    const double floor = 1e-12 * std::max(diagonal.maxCoeff(), 1e-300);
    Eigen::MatrixXd system = hessian;
    system.diagonal() += damping * diagonal.cwiseMax(floor);
    Eigen::VectorXd step = system.ldlt().solve(-grad);
    // Frozen correspondences are only trusted near the current pose.
    const double largest = step.cwiseQuotient(scale).cwiseAbs().maxCoeff();
    if (largest > kMaxStep) {
      step *= kMaxStep / largest;
    }

    Eigen::VectorXd candidate = s.params + step;
    projectScales(candidate, boneCount, config.scaleBounds);
    ++s.iterations;

    FrameMatches candidateMatches = objective.match(objective.deform(candidate));
    Eigen::VectorXd candidateGrad;
    const LossTerms terms = objective.evaluate(candidate, candidateMatches, &candidateGrad);
    checkFinite(terms, frameIndex);

    if (terms.total <= s.terms.total && step.allFinite()) {
      const double decrease = s.terms.total - terms.total;
      const double before = s.terms.total;
      s.params = std::move(candidate);
      s.terms = terms;
      grad = std::move(candidateGrad);
      matches = std::move(candidateMatches);
      hessian = objective.gaussNewtonHessian(s.params, matches);
      ++s.acceptedSteps;
      s.history.push_back(s.terms.total);
      damping = std::max(damping / 3.0, 1e-12);
      stalled = decrease <= config.convergenceTol * before ? stalled + 1 : 0;
      if (stalled >= 3) {
        break;
      }
    } else {
      damping *= 4.0;
      if (damping > 1e12) {
        break;
      }
    }
  }
  return s;
}

FrameSolve minimizeAdam(
    const FrameObjective& objective,
    const Eigen::VectorXd& initial,
    const FitConfig& config,
    size_t boneCount,
    int frameIndex) {
  const Eigen::VectorXd scale = objective.parameterScales();
  FrameSolve s;
  s.params = initial;
  projectScales(s.params, boneCount, config.scaleBounds);

  Eigen::VectorXd grad;
  s.terms = objective.evaluate(s.params, objective.match(objective.deform(s.params)), &grad);
  checkFinite(s.terms, frameIndex);
  s.history.push_back(s.terms.total);

  Eigen::VectorXd m = Eigen::VectorXd::Zero(grad.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(grad.size());
  int t = 0;
  bool freshGradient = true;
  double lr = config.stepSize;
  const double minLr = config.stepSize * 1e-7;
  const double negligible = kNegligibleLoss * objective.lossScale();

  while (s.iterations < config.maxIters && s.terms.total > negligible) {
    // Work in units of the parameter scale so that one learning rate fits all parameters.
    const Eigen::VectorXd scaledGrad = grad.cwiseProduct(scale);
    if (freshGradient) {
      ++t;
      m = kBeta1 * m + (1.0 - kBeta1) * scaledGrad;
      v = kBeta2 * v + (1.0 - kBeta2) * scaledGrad.cwiseAbs2();
      freshGradient = false;
    }
    const Eigen::VectorXd mHat = m / (1.0 - std::pow(kBeta1, t));
    const Eigen::VectorXd vHat = v / (1.0 - std::pow(kBeta2, t));
    const Eigen::VectorXd step =
        lr * mHat.cwiseQuotient((vHat.cwiseSqrt().array() + kEpsilon).matrix()).cwiseProduct(scale);

    Eigen::VectorXd candidate = s.params - step;
    projectScales(candidate, boneCount, config.scaleBounds);
    ++s.iterations;

    Eigen::VectorXd candidateGrad;
    const LossTerms terms =
        objective.evaluate(candidate, objective.match(objective.deform(candidate)), &candidateGrad);
    checkFinite(terms, frameIndex);

    if (terms.total <= s.terms.total) {
      s.params = std::move(candidate);
      s.terms = terms;
      grad = std::move(candidateGrad);
      freshGradient = true;
      ++s.acceptedSteps;
      s.history.push_back(s.terms.total);
      lr = std::min(lr * 1.2, config.stepSize);
      const size_t n = s.history.size();
      if (n > static_cast<size_t>(kConvergenceWindow)) {
        const double before = s.history[n - 1 - kConvergenceWindow];
        if (before - s.terms.total <= config.convergenceTol * before) {
          break;
        }
      }
    } else {
      // The momentum direction need not descend; retry along the preconditioned gradient.
      m = (1.0 - std::pow(kBeta1, t)) * scaledGrad;
      lr *= 0.5;
      if (lr < minLr) {
        break;
      }
    }
  }
  return s;
}

struct FrameProblem {
  const TriMesh& canonical;
  const Skeleton& skeleton;
  const SkinWeights& weights;
  const TriMesh& supervision;
  const SkinWeights* fixedSupervisionWeights;
  const FitConfig& config;
  std::span<const Vec3> previous;
  int frameIndex;
};

struct StartResult {
  Eigen::VectorXd params;
  FrameReport report;
  std::vector<Vec3> vertices;
  double lossScale = 1.0;
};

StartResult better(StartResult a, StartResult b) {
  return b.report.terms.total < a.report.terms.total ? std::move(b) : std::move(a);
}

StartResult solveFromStart(const FrameProblem& p, const Eigen::VectorXd& initial) {
  const size_t bones = p.skeleton.boneCount();
  const bool first = p.previous.empty();
  const int rounds = p.fixedSupervisionWeights ? 1 : 1 + p.config.supervisionRefreshes;
  const bool surface =
      p.config.surfaceStage && p.supervision.faceCount() > 0 && p.canonical.faceCount() > 0;

  // Without given supervision weights the first round fits the global term alone; W^ is
  // then derived from a fitted pose rather than the starting one.
  FitConfig globalOnly = p.config;
  globalOnly.localWeight = 0.0;

  StartResult out;
  out.params = initial;
  for (int round = 0; round < rounds; ++round) {
    const FitConfig& config = !p.fixedSupervisionWeights && round == 0 && rounds > 1 ? globalOnly : p.config;
    const SkinWeights target = p.fixedSupervisionWeights
        ? *p.fixedSupervisionWeights
        : supervisionWeights(
              p.canonical, p.skeleton, p.weights, p.supervision, out.params, p.config.supervisionWeights);
    if (surface) {
      const FrameObjective coarse(
          p.canonical, p.skeleton, p.weights, p.supervision, target, config, p.previous, first, ChamferMode::Surface);
      FrameSolve solve = minimizeFrame(coarse, out.params, config, bones, p.frameIndex);
      spdlog::debug(
          "frame {} round {} surface stage: loss {:.3e} -> {:.3e} in {} iterations",
          p.frameIndex,
          round,
          solve.history.front(),
          solve.terms.total,
          solve.iterations);
      out.params = solve.params;
      out.report.iterations += solve.iterations;
      out.report.acceptedSteps += solve.acceptedSteps;
    }
    const FrameObjective objective(
        p.canonical, p.skeleton, p.weights, p.supervision, target, config, p.previous, first);
    FrameSolve solve = minimizeFrame(objective, out.params, config, bones, p.frameIndex);
    spdlog::debug(
        "frame {} round {} point stage: loss {:.3e} -> {:.3e} in {} iterations",
        p.frameIndex,
        round,
        solve.history.front(),
        solve.terms.total,
        solve.iterations);
    out.params = solve.params;
    out.report.terms = solve.terms;
    out.report.iterations += solve.iterations;
    out.report.acceptedSteps += solve.acceptedSteps;
    out.report.history = std::move(solve.history);
    if (round + 1 == rounds) {
      out.vertices = objective.deform(out.params);
      out.lossScale = objective.lossScale();
    }
  }
  return out;
}

} // namespace

FrameSolve minimizeFrame(
    const FrameObjective& objective,
    const Eigen::VectorXd& initial,
    const FitConfig& config,
    size_t boneCount,
    int frameIndex) {
  if (config.optimizer == Optimizer::Adam) {
    return minimizeAdam(objective, initial, config, boneCount, frameIndex);
  }
  return minimizeLevenbergMarquardt(objective, initial, config, boneCount, frameIndex);
}

SkinWeights supervisionWeights(
    const TriMesh& canonical,
    const Skeleton& skeleton,
    const SkinWeights& weights,
    const TriMesh& supervision,
    const Eigen::VectorXd& params,
    SupervisionWeights method) {
  if (method == SupervisionWeights::Heat) {
    if (supervision.faceCount() > 0) {
      const MotionFrame frame = unpackFrame(params, skeleton.boneCount());
      return heatDiffusionSkinning(supervision, skeleton.withJoints(posedJoints(skeleton, frame)));
    }
    spdlog::warn("supervision mesh has no faces; transferring weights from the nearest fitted vertex");
  }
  const MotionFrame frame = unpackFrame(params, skeleton.boneCount());
  const auto chain = evaluateChain<double>(skeleton, frame.angles, frame.boneScales);
  const std::vector<Vec3> deformed = blendSkinVertices(
      canonical.vertices(),
      weights.matrix(),
      frame.root.rotationMatrix(),
      frame.root.translation,
      chain.rotations,
      chain.translations);
  const PointKdTree tree(deformed);
  const auto& targets = supervision.vertices();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(targets.size()), weights.matrix().cols());
  for (size_t i = 0; i < targets.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = weights.matrix().row(tree.nearest(targets[i]).index);
  }
  return SkinWeights(std::move(out));
}

FitResult fitMotion(
    const TriMesh& canonical,
    const Skeleton& skeleton,
    const SkinWeights& weights,
    std::span<const TriMesh> supervision,
    const FitConfig& config,
    std::span<const SkinWeights> fixedSupervisionWeights) {
  config.validate();
  if (supervision.empty()) {
    throw EmptyInputError("no supervision meshes to fit");
  }
  if (!fixedSupervisionWeights.empty() && fixedSupervisionWeights.size() != supervision.size()) {
    throw DimensionError(fmt::format(
        "{} supervision weight sets for {} supervision meshes",
        fixedSupervisionWeights.size(),
        supervision.size()));
  }
  if (weights.vertexCount() != canonical.vertexCount() || weights.boneCount() != skeleton.boneCount()) {
    throw DimensionError("skinning weights do not match the canonical mesh and skeleton");
  }

  const auto start = std::chrono::steady_clock::now();
  const size_t bones = skeleton.boneCount();
  const Eigen::VectorXd rest = packFrame(MotionFrame::rest(bones));
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::uniform_real_distribution<double> spread(-config.restartSpread, config.restartSpread);
  const Eigen::Index angleBegin = 6;
  const Eigen::Index angleEnd = static_cast<Eigen::Index>(6 + 3 * bones);

  FitResult result;
  Eigen::VectorXd previousParams = rest;
  for (size_t f = 0; f < supervision.size(); ++f) {
    const auto frameStart = std::chrono::steady_clock::now();
    if (supervision[f].vertexCount() == 0) {
      throw EmptyInputError(fmt::format("supervision mesh {} is empty", f));
    }
    for (size_t v = 0; v < supervision[f].vertexCount(); ++v) {
      if (!supervision[f].vertex(v).allFinite()) {
        throw NumericalError(fmt::format("frame {}: supervision vertex {} is not finite", f, v));
      }
    }
    const FrameProblem problem{
        canonical,
        skeleton,
        weights,
        supervision[f],
        fixedSupervisionWeights.empty() ? nullptr : &fixedSupervisionWeights[f],
        config,
        f > 0 ? std::span<const Vec3>(result.fittedVertices.back()) : std::span<const Vec3>(),
        static_cast<int>(f)};

    Eigen::VectorXd initial = config.warmStart && f > 0 ? previousParams : rest;
    if (config.initJitter > 0.0) {
      for (Eigen::Index k = angleBegin; k < angleEnd; ++k) {
        initial(k) += config.initJitter * jitter(rng);
      }
    }
    StartResult best = solveFromStart(problem, initial);
    const double good = config.restartTol * best.lossScale;
    const auto unmatched = [&](const StartResult& r) {
      return config.globalWeight * r.report.terms.global + config.localWeight * r.report.terms.local > good;
    };
    int attempts = 0;
    if (unmatched(best) && config.restarts > 0 && initial != rest) {
      StartResult fromRest = solveFromStart(problem, rest);
      ++attempts;
      best = better(std::move(best), std::move(fromRest));
    }
    while (unmatched(best) && attempts < config.restarts) {
      Eigen::VectorXd random = rest;
      for (Eigen::Index k = angleBegin; k < angleEnd; ++k) {
        random(k) = spread(rng);
      }
      StartResult candidate = solveFromStart(problem, random);
      ++attempts;
      best = better(std::move(best), std::move(candidate));
    }

    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(1 + bones); ++k) {
      const Eigen::Index at = k == 0 ? 0 : angleBegin + 3 * (k - 1);
      best.params.segment<3>(at) = canonicalRotationVector(best.params.segment<3>(at));
    }
    best.report.restarts = attempts;
    best.report.wallSeconds = seconds(frameStart);
    spdlog::debug(
        "frame {}: loss {:.3e} after {} iterations and {} restarts",
        f,
        best.report.terms.total,
        best.report.iterations,
        attempts);
    result.report.frames.push_back(std::move(best.report));
    result.clip.frames.push_back(unpackFrame(best.params, bones));
    result.fittedVertices.push_back(std::move(best.vertices));
    previousParams = best.params;
  }
  result.report.wallSeconds = seconds(start);
  return result;
}

nlohmann::json fitReportToJson(const FitReport& report) {
  nlohmann::json frames = nlohmann::json::array();
  for (size_t f = 0; f < report.frames.size(); ++f) {
    const auto& r = report.frames[f];
    frames.push_back({
        {"frame", f},
        {"global", r.terms.global},
        {"local", r.terms.local},
        {"symm", r.terms.symmetry},
        {"lap", r.terms.laplacian},
        {"rigid", r.terms.rigidity},
        {"total", r.terms.total},
        {"iterations", r.iterations},
        {"accepted_steps", r.acceptedSteps},
        {"restarts", r.restarts},
        {"wall_seconds", r.wallSeconds},
    });
  }
  return {{"frames", frames}, {"wall_seconds", report.wallSeconds}};
}

} // namespace kinemesh
