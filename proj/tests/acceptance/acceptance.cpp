#include "kinemesh/common/json_file.h"
#include "kinemesh/deform/blend_skin.h"
#include "kinemesh/fit/motion_fit.h"
#include "kinemesh/fit/synthetic.h"
#include "kinemesh/glc/chamfer.h"
#include "kinemesh/retarget/embed.h"
#include "kinemesh/retarget/interior_field.h"
#include "kinemesh/retarget/transfer.h"
#include "kinemesh/skeleton/forward_kinematics.h"
#include "kinemesh/skinning/gaussian_skinning.h"
#include "kinemesh/skinning/heat_skinning.h"

#include "oracles.h"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

using namespace kinemesh;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::vector<Vec3> posedVertices(const Rig& rig, const MotionFrame& frame) {
  const auto transforms = forwardKinematics(rig.skeleton, frame);
  return blendSkinVertices(
      rig.mesh.vertices(),
      rig.weights.matrix(),
      frame.root.rotationMatrix(),
      frame.root.translation,
      [&] {
        std::vector<Eigen::Matrix3d> r;
        for (const auto& t : transforms) {
          r.push_back(t.rotationMatrix());
        }
        return r;
      }(),
      [&] {
        std::vector<Vec3> t;
        for (const auto& x : transforms) {
          t.push_back(x.translation);
        }
        return t;
      }());
}

double rmse(std::span<const Vec3> a, std::span<const Vec3> b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    sum += (a[i] - b[i]).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(a.size()));
}

Outcome chamferOracleEquivalence() {
  const Stopwatch clock;
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<size_t> size(300, 1000);
  std::uniform_int_distribution<size_t> bones(2, 6);
  double worst = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    const size_t n = size(rng);
    const size_t m = size(rng);
    const size_t b = bones(rng);
    const auto pred = oracle::randomCloud(n, rng);
    const auto target = oracle::randomCloud(m, rng, 1.2);
    const Eigen::MatrixXd wp = oracle::randomStochastic(n, b, rng);
    const Eigen::MatrixXd wt = oracle::randomStochastic(m, b, rng);
    const SkinWeights sp(wp);
    const SkinWeights st(wt);
    worst = std::max(worst, oracle::relativeError(chamferGlobal(pred, target), oracle::chamferGlobal(pred, target)));
    worst = std::max(
        worst,
        oracle::relativeError(
            chamferLocal(pred, target, sp, st, partDecompose(sp), partDecompose(st)),
            oracle::chamferLocal(pred, target, wp, wt)));
  }
  const double seconds = clock.seconds();
  return {worst < 1e-9 && seconds < 60.0, fmt::format("max relative error {:.2e}, {:.1f} s", worst, seconds)};
}

Outcome gradientCorrectness() {
  const Stopwatch clock;
  LimbShape shape;
  shape.axialSegments = 24;
  shape.radialSegments = 12;
  shape.capRings = 3;
  const Rig rig = makeLimbRig(3, shape);
  FitConfig config;
  config.symmetryWeight = 0.5;
  config.laplacianWeight = 0.3;
  config.rigidityWeight = 1.0;
  config.symmetryPlane = SymmetryPlane(Vec3(1.0, 0.0, 0.0), 1.5);

  std::mt19937_64 rng(2002);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  auto randomParams = [&] {
    MotionFrame frame = randomClip(3, 1, rng(), 30.0 * kDeg, 0.9, 1.1).frames[0];
    frame.root = RigidTransform::fromRotationVector(Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng)));
    return packFrame(frame);
  };
  auto posed = [&](const Eigen::VectorXd& params) {
    return rig.mesh.withVertices(posedVertices(rig, unpackFrame(params, 3)));
  };

  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const TriMesh supervision = posed(randomParams());
    const std::vector<Vec3> previous = posed(randomParams()).vertices();
    const Eigen::VectorXd params = randomParams();
    const bool firstFrame = trial % 2 == 0;
    const FrameObjective objective(
        rig.mesh,
        rig.skeleton,
        rig.weights,
        supervision,
        rig.weights,
        config,
        firstFrame ? std::span<const Vec3>() : std::span<const Vec3>(previous),
        firstFrame);
    const FrameMatches matches = objective.match(objective.deform(params));
    Eigen::VectorXd analytic;
    objective.evaluate(params, matches, &analytic);
    const Eigen::VectorXd numeric = oracle::finiteDifferenceGradient(
        [&](const Eigen::VectorXd& p) { return objective.evaluate(p, matches).total; },
        params,
        1e-5 * objective.parameterScales());
    for (Eigen::Index i = 0; i < params.size(); ++i) {
      worst = std::max(worst, oracle::relativeError(analytic(i), numeric(i), 1e-6));
    }
  }
  const double seconds = clock.seconds();
  return {worst < 1e-3 && seconds < 120.0, fmt::format("max relative error {:.2e}, {:.1f} s", worst, seconds)};
}

Outcome fkLbsIdentity() {
  const Rig rig = makeLimbRig(3);
  double restError = 0.0;
  const auto rest = posedVertices(rig, MotionFrame::rest(3));
  for (size_t i = 0; i < rest.size(); ++i) {
    restError = std::max(restError, (rest[i] - rig.mesh.vertex(i)).norm());
  }
  const DeformedMesh viaMesh =
      blendSkin(rig.mesh, rig.weights, RigidTransform::identity(), forwardKinematics(rig.skeleton, MotionFrame::rest(3)));
  for (size_t i = 0; i < rest.size(); ++i) {
    restError = std::max(restError, (viaMesh.vertices()[i] - rig.mesh.vertex(i)).norm());
  }

  std::mt19937_64 rng(3003);
  const Eigen::MatrixXd w = oracle::randomStochastic(rig.mesh.vertexCount(), 3, rng);
  std::vector<int> labels(rig.mesh.vertexCount());
  for (size_t i = 0; i < labels.size(); ++i) {
    w.row(static_cast<Eigen::Index>(i)).maxCoeff(&labels[i]);
  }
  const SkinWeights oneHot = SkinWeights::oneHot(labels, 3);
  double oneHotError = 0.0;
  const MotionClip clip = randomClip(3, 10, 3003, 60.0 * kDeg, 0.8, 1.25);
  for (MotionFrame frame : clip.frames) {
    frame.root = RigidTransform::fromRotationVector(Vec3(0.4, -0.3, 0.9), Vec3(1.0, -2.0, 0.5));
    const auto transforms = forwardKinematics(rig.skeleton, frame);
    const DeformedMesh posed = blendSkin(rig.mesh, oneHot, frame.root, transforms);
    for (size_t i = 0; i < labels.size(); ++i) {
      const Vec3 direct = frame.root.apply(transforms[labels[i]].apply(rig.mesh.vertex(i)));
      oneHotError = std::max(oneHotError, (posed.vertices()[i] - direct).norm());
    }
  }
  return {
      restError < 1e-12 && oneHotError < 1e-12,
      fmt::format("rest max error {:.2e}, one-hot max error {:.2e}", restError, oneHotError)};
}

Outcome syntheticRecovery() {
  const Stopwatch clock;
  const Rig rig = makeLimbRig(3);
  const double diagonal = bboxDiagonal(rig.mesh);
  const MotionClip truth = randomClip(3, 20, 42, 30.0 * kDeg, 0.9, 1.1);
  std::vector<TriMesh> supervision;
  for (const auto& frame : truth.frames) {
    supervision.push_back(rig.mesh.withVertices(posedVertices(rig, frame)));
  }
  FitConfig config;
  config.rigidityWeight = 0.0;
  const FitResult result = fitMotion(rig.mesh, rig.skeleton, rig.weights, supervision, config);
  double worstRmse = 0.0;
  double worstGlc = 0.0;
  for (size_t f = 0; f < supervision.size(); ++f) {
    worstRmse = std::max(worstRmse, rmse(result.fittedVertices[f], supervision[f].vertices()));
    worstGlc = std::max(worstGlc, glcLoss(result.fittedVertices[f], supervision[f].vertices(), rig.weights, rig.weights));
  }
  const double seconds = clock.seconds();
  return {
      worstRmse < 0.01 * diagonal && worstGlc < 1e-4 * diagonal * diagonal && seconds < 600.0,
      fmt::format(
          "{} vertices, max RMSE {:.2e} diag, max GLC {:.2e} diag^2, {:.1f} s",
          rig.mesh.vertexCount(),
          worstRmse / diagonal,
          worstGlc / (diagonal * diagonal),
          seconds)};
}

Outcome swappedParts() {
  std::mt19937_64 rng(5005);
  bool pass = true;
  std::string detail;
  for (const double d : {1.0, 10.0}) {
    std::uniform_real_distribution<double> jitter(-0.01 * d, 0.01 * d);
    std::vector<Vec3> points;
    std::vector<int> predLabels;
    std::vector<int> targetLabels;
    for (int part = 0; part < 2; ++part) {
      for (int i = 0; i < 200; ++i) {
        points.emplace_back(part * d + jitter(rng), jitter(rng), jitter(rng));
        predLabels.push_back(part);
        targetLabels.push_back(1 - part);
      }
    }
    const SkinWeights wp = SkinWeights::oneHot(predLabels, 2);
    const SkinWeights wt = SkinWeights::oneHot(targetLabels, 2);
    const double global = chamferGlobal(points, points);
    const double local = chamferLocal(points, points, wp, wt, partDecompose(wp), partDecompose(wt));
    pass = pass && global < 1e-6 * d * d && local > 0.5 * d * d && glcLoss(points, points, wp, wt, 1.0) > global;
    detail += fmt::format("d={}: global {:.2e} d^2, local {:.3f} d^2; ", d, global / (d * d), local / (d * d));
  }
  return {pass, detail.substr(0, detail.size() - 2)};
}

// Largest change of a vertex's inter-frame displacement between successive frame pairs:
// max over t, i of ||X_i^{t+1} - 2 X_i^t + X_i^{t-1}||.
double maxDisplacementJump(const std::vector<std::vector<Vec3>>& frames) {
  double worst = 0.0;
  for (size_t t = 1; t + 1 < frames.size(); ++t) {
    for (size_t i = 0; i < frames[t].size(); ++i) {
      worst = std::max(worst, (frames[t + 1][i] - 2.0 * frames[t][i] + frames[t - 1][i]).norm());
    }
  }
  return worst;
}

Outcome temporalConsistency() {
  const Stopwatch clock;
  LimbShape shape;
  shape.axialSegments = 24;
  shape.radialSegments = 12;
  shape.capRings = 3;
  const Rig rig = makeLimbRig(3, shape);
  const double diagonal = bboxDiagonal(rig.mesh);
  int wins = 0;
  std::string jumps;
  for (int trial = 0; trial < 10; ++trial) {
    const uint64_t seed = 6000 + static_cast<uint64_t>(trial);
    MotionClip truth = smoothClip(3, AC6_FRAMES, seed, AC6_ANGLE * kDeg);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, AC6_NOISE * diagonal);
    std::vector<TriMesh> supervision;
    std::vector<std::vector<Vec3>> clean;
    for (const auto& frame : truth.frames) {
      auto vertices = posedVertices(rig, frame);
      clean.push_back(vertices);
      for (auto& v : vertices) {
        v += Vec3(noise(rng), noise(rng), noise(rng));
      }
      supervision.push_back(rig.mesh.withVertices(vertices));
    }
    double jump[2];
    for (const int rigid : {0, 1}) {
      FitConfig config;
      config.rigidityWeight = rigid;
      config.restarts = 0;
      jump[rigid] = maxDisplacementJump(fitMotion(rig.mesh, rig.skeleton, rig.weights, supervision, config).fittedVertices);
    }
    wins += jump[1] < jump[0] ? 1 : 0;
    jumps += fmt::format(" {:.4f}/{:.4f} ({:.4f})", jump[1] / diagonal, jump[0] / diagonal, maxDisplacementJump(clean) / diagonal);
  }
  return {wins >= 9, fmt::format("{}/10 trials smoother with rigidity ({:.1f} s); jump/diag with/without rigidity (truth):{}", wins, clock.seconds(), jumps)};
}

Outcome retargetIdentity() {
  const Rig rig = makeLimbRig(3);
  MotionClip clip = randomClip(3, 10, 7007, 45.0 * kDeg, 0.85, 1.2);
  for (size_t f = 0; f < clip.frames.size(); ++f) {
    clip.frames[f].root = RigidTransform::fromRotationVector(Vec3(0.1 * f, -0.2, 0.3), Vec3(0.05 * f, 1.0, -0.5));
  }
  const auto source = animate(clip, rig.skeleton, rig.mesh, rig.weights);
  const auto moved = transferMotion(
      clip, rig.skeleton, rig.skeleton, JointCorrespondence::identity(rig.skeleton.jointCount()), rig.mesh, rig.weights);
  double worst = 0.0;
  for (size_t f = 0; f < source.size(); ++f) {
    for (size_t i = 0; i < rig.mesh.vertexCount(); ++i) {
      worst = std::max(worst, (source[f].vertices()[i] - moved[f].vertices()[i]).norm());
    }
  }
  return {worst < 1e-10, fmt::format("max vertex error {:.2e} over {} frames", worst, source.size())};
}

bool rowsValid(const SkinWeights& w) {
  for (Eigen::Index r = 0; r < w.matrix().rows(); ++r) {
    if (w.matrix().row(r).minCoeff() < 0.0 || std::abs(w.matrix().row(r).sum() - 1.0) > 1e-6) {
      return false;
    }
  }
  return true;
}

Outcome skinningValidity() {
  const Rig capsule = makeCapsuleRig();
  const Rig limb = makeLimbRig(3);
  std::vector<SkinWeights> outputs{
      capsule.weights,
      limb.weights,
      heatDiffusionSkinning(makeLimbRig(1).mesh, makeLimbRig(1).skeleton),
      gaussianSkinning(limb.mesh, ellipsoidsFromSkeleton(limb.skeleton)),
      gaussianSkinning(capsule.mesh, ellipsoidsFromSkeleton(capsule.skeleton, 0.1)),
  };
  bool valid = true;
  for (const auto& w : outputs) {
    valid = valid && rowsValid(w);
  }

  // Two contiguous bands: every vertex of part 0 lies at or before every vertex of part 1
  // along the axis, and both parts are present.
  const PartDecomposition parts = partDecompose(capsule.weights);
  double hi0 = -std::numeric_limits<double>::infinity();
  double lo1 = std::numeric_limits<double>::infinity();
  for (size_t v = 0; v < capsule.mesh.vertexCount(); ++v) {
    const double x = capsule.mesh.vertex(v).x();
    if (parts.labels[v] == 0) {
      hi0 = std::max(hi0, x);
    } else {
      lo1 = std::min(lo1, x);
    }
  }
  const bool bands = parts.partCount() == 2 && hi0 <= lo1;
  return {
      valid && bands,
      fmt::format(
          "{} weight sets valid: {}; capsule parts {}, band 0 ends at x={:.3f}, band 1 starts at x={:.3f}",
          outputs.size(),
          valid ? "yes" : "no",
          parts.partCount(),
          hi0,
          lo1)};
}

Outcome embeddingSanity() {
  bool pass = true;
  std::string detail;
  for (const auto& [name, rig] : {std::pair{"limb", makeLimbRig(3)}, std::pair{"capsule", makeCapsuleRig()}}) {
    const InteriorField field(rig.mesh, 48);
    const Embedding e = embedSkeleton(rig.skeleton, field);
    double worst = 0.0;
    bool interior = true;
    for (size_t j = 0; j < rig.skeleton.jointCount(); ++j) {
      worst = std::max(worst, (e.skeleton.joints()[j] - rig.skeleton.joints()[j]).norm());
      interior = interior && field.isInterior(e.skeleton.joints()[j]);
    }
    pass = pass && worst < 3.0 * field.voxelSize() && interior;
    detail += fmt::format("{}: max offset {:.2f} voxels, interior {}; ", name, worst / field.voxelSize(), interior ? "yes" : "no");
  }
  return {pass, detail.substr(0, detail.size() - 2)};
}

int runCommand(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string readBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path work = fs::temp_directory_path() / "kinemesh_acceptance_determinism";
  fs::remove_all(work);
  fs::copy(KINEMESH_FIXTURES, work, fs::copy_options::recursive);
  const std::string config = (work / "pipeline.json").string();
  std::vector<std::string> clips;
  std::vector<std::string> summaries;
  for (const char* run : {"run_a", "run_b"}) {
    const int code = runCommand(
        fmt::format("\"{}\" pipeline --config \"{}\" --output \"{}\" > /dev/null 2>&1", KINEMESH_CLI, config, (work / run).string()));
    if (code != 0) {
      fs::remove_all(work);
      return {false, fmt::format("pipeline run {} exited with {}", run, code)};
    }
    clips.push_back(readBytes(work / run / "clip.json"));
    summaries.push_back(readBytes(work / run / "summary.json"));
  }
  fs::remove_all(work);
  const bool same = !clips[0].empty() && clips[0] == clips[1] && summaries[0] == summaries[1];
  return {
      same,
      fmt::format(
          "clip.json {} ({} bytes), summary.json {} ({} bytes)",
          clips[0] == clips[1] ? "identical" : "differs",
          clips[0].size(),
          summaries[0] == summaries[1] ? "identical" : "differs",
          summaries[0].size())};
}

} // namespace

// Runs every criterion, or only those whose numbers are given as arguments.
int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::err);
  const std::vector<std::function<Outcome()>> criteria{
      chamferOracleEquivalence,
      gradientCorrectness,
      fkLbsIdentity,
      syntheticRecovery,
      swappedParts,
      temporalConsistency,
      retargetIdentity,
      skinningValidity,
      embeddingSanity,
      determinism,
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    selected.insert(std::atoi(argv[i]));
  }
  bool allPass = true;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(number)) {
      continue;
    }
    Outcome outcome;
    try {
      outcome = criteria[i]();
    } catch (const std::exception& e) {
      outcome = {false, fmt::format("threw: {}", e.what())};
    }
    allPass = allPass && outcome.pass;
    fmt::print("AC{} {} {}\n", number, outcome.pass ? "PASS" : "FAIL", outcome.detail);
    std::fflush(stdout);
  }
  return allPass ? 0 : 1;
}
