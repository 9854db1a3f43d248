#include "kinemesh/common/error.h"
#include "kinemesh/fit/frame_objective.h"
#include "kinemesh/fit/synthetic.h"
#include "kinemesh/skeleton/forward_kinematics.h"

#include "oracles.h"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace kinemesh;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

class FitGradientTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    LimbShape shape;
    shape.axialSegments = 24;
    shape.radialSegments = 12;
    shape.capRings = 3;
    rig_ = new Rig(makeLimbRig(3, shape));
  }
  static void TearDownTestSuite() {
    delete rig_;
    rig_ = nullptr;
  }

  static Eigen::VectorXd randomParams(std::mt19937_64& rng) {
    MotionFrame frame = randomClip(3, 1, rng(), 30.0 * kDeg, 0.9, 1.1).frames[0];
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    frame.root = RigidTransform::fromRotationVector(
        Eigen::Vector3d(u(rng), u(rng), u(rng)), Eigen::Vector3d(u(rng), u(rng), u(rng)));
    return packFrame(frame);
  }

  static TriMesh posed(const Eigen::VectorXd& params) {
    const FitConfig config;
    const FrameObjective objective(
        rig_->mesh, rig_->skeleton, rig_->weights, rig_->mesh, rig_->weights, config, {}, false);
    return rig_->mesh.withVertices(objective.deform(params));
  }

  static Rig* rig_;
};

Rig* FitGradientTest::rig_ = nullptr;

TEST_F(FitGradientTest, MatchesCentralDifferencesOnRandomConfigurations) {
  std::mt19937_64 rng(7);
  FitConfig config;
  config.localWeight = 1.0;
  config.symmetryWeight = 0.5;
  config.laplacianWeight = 0.3;
  config.rigidityWeight = 1.0;
  config.symmetryPlane = SymmetryPlane(Vec3(1.0, 0.0, 0.0), 1.5);

  for (int trial = 0; trial < 20; ++trial) {
    const TriMesh supervision = posed(randomParams(rng));
    const std::vector<Vec3> previous = posed(randomParams(rng)).vertices();
    const Eigen::VectorXd params = randomParams(rng);
    const bool firstFrame = trial % 2 == 0;
    const FrameObjective objective(
        rig_->mesh,
        rig_->skeleton,
        rig_->weights,
        supervision,
        rig_->weights,
        config,
        firstFrame ? std::span<const Vec3>() : std::span<const Vec3>(previous),
        firstFrame);

    const FrameMatches matches = objective.match(objective.deform(params));
    Eigen::VectorXd analytic;
    objective.evaluate(params, matches, &analytic);
    ASSERT_GT(analytic.norm(), 1e-3);
    const Eigen::VectorXd numeric = oracle::finiteDifferenceGradient(
        [&](const Eigen::VectorXd& p) { return objective.evaluate(p, matches).total; },
        params,
        1e-5 * objective.parameterScales());
    for (Eigen::Index i = 0; i < params.size(); ++i) {
      EXPECT_LT(oracle::relativeError(analytic(i), numeric(i), 1e-6), 1e-3)
          << "trial " << trial << " component " << i << ": " << analytic(i) << " vs " << numeric(i);
    }
  }
}

TEST_F(FitGradientTest, VanishesAtPerfectFit) {
  std::mt19937_64 rng(11);
  const FitConfig config;
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd params = randomParams(rng);
    const TriMesh supervision = posed(params);
    const FrameObjective objective(
        rig_->mesh, rig_->skeleton, rig_->weights, supervision, rig_->weights, config, {}, true);
    EXPECT_LT(objective.gradient(params).norm(), 1e-6);
    EXPECT_NEAR(objective.evaluate(params).total, 0.0, 1e-20);
  }
}

TEST_F(FitGradientTest, ZeroLossWeightsGiveZeroGradient) {
  std::mt19937_64 rng(3);
  FitConfig config;
  config.globalWeight = 0.0;
  config.localWeight = 0.0;
  config.symmetryWeight = 0.0;
  config.laplacianWeight = 0.0;
  config.rigidityWeight = 0.0;
  const TriMesh supervision = posed(randomParams(rng));
  const std::vector<Vec3> previous = posed(randomParams(rng)).vertices();
  const FrameObjective objective(
      rig_->mesh, rig_->skeleton, rig_->weights, supervision, rig_->weights, config, previous, true);
  const Eigen::VectorXd g = objective.gradient(randomParams(rng));
  EXPECT_EQ(g.size(), 18);
  EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(FrameParameters, PackUnpackRoundTrip) {
  MotionFrame frame = randomClip(4, 1, 5, 0.5, 0.9, 1.1).frames[0];
  frame.root = RigidTransform::fromRotationVector(Eigen::Vector3d(0.1, -0.2, 0.3), Eigen::Vector3d(1, 2, 3));
  const MotionFrame back = unpackFrame(packFrame(frame), 4);
  EXPECT_TRUE(back.root.rotation.isApprox(frame.root.rotation, 1e-12));
  EXPECT_TRUE(back.root.translation.isApprox(frame.root.translation));
  for (size_t b = 0; b < 4; ++b) {
    EXPECT_TRUE(back.angles[b].isApprox(frame.angles[b]));
    EXPECT_EQ(back.boneScales[b], frame.boneScales[b]);
  }
  EXPECT_THROW(unpackFrame(Eigen::VectorXd::Zero(5), 4), DimensionError);
}

} // namespace
