#include "kinemesh/common/error.h"
#include "kinemesh/deform/blend_skin.h"
#include "kinemesh/fit/frame_objective.h"
#include "kinemesh/fit/motion_fit.h"
#include "kinemesh/fit/synthetic.h"
#include "kinemesh/glc/chamfer.h"
#include "kinemesh/skeleton/forward_kinematics.h"
#include "kinemesh/skeleton/serialization.h"

#include "oracles.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace kinemesh;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

class FitTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    LimbShape shape;
    shape.axialSegments = 24;
    shape.radialSegments = 12;
    shape.capRings = 3;
    rig_ = new Rig(makeLimbRig(3, shape));
    diagonal_ = bboxDiagonal(rig_->mesh);
  }
  static void TearDownTestSuite() {
    delete rig_;
    rig_ = nullptr;
  }

  static TriMesh posed(const MotionFrame& frame) {
    const auto transforms = forwardKinematics(rig_->skeleton, frame);
    return blendSkin(rig_->mesh, rig_->weights, frame.root, transforms).mesh;
  }

  static std::vector<TriMesh> supervisionFor(const MotionClip& clip) {
    std::vector<TriMesh> out;
    for (const auto& f : clip.frames) {
      out.push_back(posed(f));
    }
    return out;
  }

  static double rmse(std::span<const Vec3> a, std::span<const Vec3> b) {
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
      sum += (a[i] - b[i]).squaredNorm();
    }
    return std::sqrt(sum / static_cast<double>(a.size()));
  }

  static FitConfig quietConfig() {
    FitConfig config;
    config.rigidityWeight = 0.0;
    return config;
  }

  static Rig* rig_;
  static double diagonal_;
};

Rig* FitTest::rig_ = nullptr;
double FitTest::diagonal_ = 0.0;

TEST_F(FitTest, RepeatedCanonicalRecoversRest) {
  const std::vector<TriMesh> supervision(3, rig_->mesh);
  const FitResult result = fitMotion(rig_->mesh, rig_->skeleton, rig_->weights, supervision, FitConfig{});
  ASSERT_EQ(result.clip.frames.size(), 3u);
  for (size_t f = 0; f < 3; ++f) {
    const MotionFrame& frame = result.clip.frames[f];
    for (const auto& a : frame.angles) {
      EXPECT_LT(a.norm(), 1e-2);
    }
    for (const double s : frame.boneScales) {
      EXPECT_NEAR(s, 1.0, 1e-2);
    }
    const double glc = glcLoss(result.fittedVertices[f], rig_->mesh.vertices(), rig_->weights, rig_->weights);
    EXPECT_LT(glc, 1e-6 * diagonal_ * diagonal_);
  }
}

// A leaf bone's own scale only moves its end joint, which no vertex follows, so it is not
// observable from the mesh and is left out of parameter comparisons.
TEST_F(FitTest, RecoversSyntheticMotion) {
  const MotionClip truth = randomClip(3, 4, 21, 25.0 * kDeg, 0.92, 1.08);
  const auto supervision = supervisionFor(truth);
  const FitResult result = fitMotion(rig_->mesh, rig_->skeleton, rig_->weights, supervision, quietConfig());
  for (size_t f = 0; f < truth.frames.size(); ++f) {
    EXPECT_LT(rmse(result.fittedVertices[f], supervision[f].vertices()), 1e-3 * diagonal_) << "frame " << f;
    for (size_t b = 0; b < 2; ++b) {
      EXPECT_NEAR(result.clip.frames[f].boneScales[b], truth.frames[f].boneScales[b], 1e-3);
    }
    EXPECT_EQ(result.clip.frames[f].boneScales[2], 1.0);
  }
}

TEST_F(FitTest, FixedSupervisionWeightsRecoverMotion) {
  const MotionClip truth = randomClip(3, 3, 5, 25.0 * kDeg, 0.95, 1.05);
  const auto supervision = supervisionFor(truth);
  const std::vector<SkinWeights> fixed(supervision.size(), rig_->weights);
  const FitResult result = fitMotion(rig_->mesh, rig_->skeleton, rig_->weights, supervision, quietConfig(), fixed);
  for (size_t f = 0; f < truth.frames.size(); ++f) {
    EXPECT_LT(rmse(result.fittedVertices[f], supervision[f].vertices()), 1e-3 * diagonal_) << "frame " << f;
  }
}

TEST_F(FitTest, GaussNewtonHessianMatchesFiniteDifferencesAtPerfectFit) {
  MotionFrame frame = randomClip(3, 1, 9, 20.0 * kDeg, 0.95, 1.05).frames[0];
  frame.root = RigidTransform::fromRotationVector(Vec3(0.1, -0.2, 0.15), Vec3(0.3, 0.1, -0.2));
  const TriMesh supervision = posed(frame);
  FitConfig config;
  config.rigidityWeight = 0.0;
  const FrameObjective objective(rig_->mesh, rig_->skeleton, rig_->weights, supervision, rig_->weights, config, {}, false);
  const Eigen::VectorXd params = packFrame(frame);
  const Eigen::MatrixXd gn = objective.gaussNewtonHessian(params, objective.match(objective.deform(params)));
  const Eigen::VectorXd scales = objective.parameterScales();
  Eigen::MatrixXd fd(params.size(), params.size());
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double h = 1e-5 * scales(i);
    Eigen::VectorXd plus = params;
    Eigen::VectorXd minus = params;
    plus(i) += h;
    minus(i) -= h;
    fd.col(i) = (objective.gradient(plus) - objective.gradient(minus)) / (2.0 * h);
  }
  const Eigen::MatrixXd symmetric = 0.5 * (fd + fd.transpose());
  EXPECT_LT((gn - symmetric).norm(), 1e-4 * gn.norm());
}

TEST_F(FitTest, AcceptedObjectiveNeverIncreases) {
  const MotionClip truth = randomClip(3, 2, 13, 30.0 * kDeg, 0.9, 1.1);
  const auto supervision = supervisionFor(truth);
  for (const Optimizer optimizer : {Optimizer::LevenbergMarquardt, Optimizer::Adam}) {
    FitConfig config;
    config.optimizer = optimizer;
    config.maxIters = optimizer == Optimizer::Adam ? 150 : 400;
    const FitResult result = fitMotion(rig_->mesh, rig_->skeleton, rig_->weights, supervision, config);
    for (const FrameReport& report : result.report.frames) {
      ASSERT_FALSE(report.history.empty());
      for (size_t i = 1; i < report.history.size(); ++i) {
        EXPECT_LE(report.history[i], report.history[i - 1]);
      }
      EXPECT_LE(report.history.back(), report.history.front());
      EXPECT_GE(report.iterations, report.acceptedSteps);
    }
  }
}

TEST_F(FitTest, BoneScalesStayWithinBounds) {
  MotionClip truth = randomClip(3, 1, 4, 10.0 * kDeg);
  truth.frames[0].boneScales = {1.5, 0.6, 1.0};
  const auto supervision = supervisionFor(truth);
  FitConfig config = quietConfig();
  config.restarts = 0;
  const FitResult result = fitMotion(rig_->mesh, rig_->skeleton, rig_->weights, supervision, config);
  for (const double s : result.clip.frames[0].boneScales) {
    EXPECT_TRUE(config.scaleBounds.contains(s)) << s;
  }
  EXPECT_GT(result.clip.frames[0].boneScales[0], 1.15);
}

TEST_F(FitTest, IsDeterministic) {
  const MotionClip truth = randomClip(3, 2, 17, 30.0 * kDeg, 0.9, 1.1);
  const auto supervision = supervisionFor(truth);
  FitConfig config;
  config.initJitter = 0.05;
  config.seed = 99;
  const FitResult a = fitMotion(rig_->mesh, rig_->skeleton, rig_->weights, supervision, config);
  const FitResult b = fitMotion(rig_->mesh, rig_->skeleton, rig_->weights, supervision, config);
  EXPECT_EQ(clipToJson(a.clip).dump(), clipToJson(b.clip).dump());
  EXPECT_EQ(a.fittedVertices, b.fittedVertices);
}

// The root rotation and the first bone both turn about the root joint, so joint positions
// rather than angles are compared.
TEST_F(FitTest, WarmStartTracksSmoothMotion) {
  const MotionClip truth = smoothClip(3, 6, 8, 25.0 * kDeg);
  const auto supervision = supervisionFor(truth);
  FitConfig config = quietConfig();
  config.warmStart = true;
  const FitResult result = fitMotion(rig_->mesh, rig_->skeleton, rig_->weights, supervision, config);
  const int leaf = rig_->skeleton.boneJoint(2);
  for (size_t f = 0; f < truth.frames.size(); ++f) {
    EXPECT_LT(rmse(result.fittedVertices[f], supervision[f].vertices()), 1e-3 * diagonal_);
    if (f > 0) {
      EXPECT_EQ(result.report.frames[f].restarts, 0) << "frame " << f;
    }
    const auto fitted = posedJoints(rig_->skeleton, result.clip.frames[f]);
    const auto expected = posedJoints(rig_->skeleton, truth.frames[f]);
    for (size_t j = 0; j < fitted.size(); ++j) {
      if (static_cast<int>(j) != leaf) {
        EXPECT_LT((fitted[j] - expected[j]).norm(), 1e-3 * diagonal_) << "frame " << f << " joint " << j;
      }
    }
  }
}

TEST_F(FitTest, InvalidInputsThrow) {
  EXPECT_THROW(fitMotion(rig_->mesh, rig_->skeleton, rig_->weights, std::vector<TriMesh>{}, FitConfig{}), EmptyInputError);
  EXPECT_THROW(
      fitMotion(rig_->mesh, rig_->skeleton, rig_->weights, std::vector<TriMesh>{TriMesh()}, FitConfig{}), EmptyInputError);
  const SkinWeights wrong = SkinWeights::oneHot(std::vector<int>(rig_->mesh.vertexCount() - 1, 0), 3);
  EXPECT_THROW(
      fitMotion(rig_->mesh, rig_->skeleton, wrong, std::vector<TriMesh>{rig_->mesh}, FitConfig{}), DimensionError);
}

TEST_F(FitTest, NonFiniteSupervisionNamesFrame) {
  std::vector<Vec3> vertices = rig_->mesh.vertices();
  vertices[5] = Vec3(std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0);
  const std::vector<TriMesh> supervision{rig_->mesh, rig_->mesh.withVertices(vertices)};
  try {
    fitMotion(rig_->mesh, rig_->skeleton, rig_->weights, supervision, FitConfig{});
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("frame 1"), std::string::npos) << e.what();
  }
}

TEST(FitConfig, JsonRoundTripAndValidation) {
  FitConfig config;
  config.localWeight = 0.5;
  config.symmetryWeight = 0.25;
  config.optimizer = Optimizer::Adam;
  config.scaleBounds = {0.7, 1.4};
  config.supervisionWeights = SupervisionWeights::Heat;
  config.restarts = 2;
  config.seed = 42;
  const FitConfig back = fitConfigFromJson(fitConfigToJson(config));
  EXPECT_EQ(fitConfigToJson(back).dump(), fitConfigToJson(config).dump());
  EXPECT_EQ(back.optimizer, Optimizer::Adam);
  EXPECT_EQ(back.scaleBounds.max, 1.4);

  EXPECT_THROW(fitConfigFromJson(nlohmann::json::parse(R"({"lambda_nope": 1})")), std::invalid_argument);
  EXPECT_ANY_THROW(fitConfigFromJson(nlohmann::json::parse(R"({"max_iters": -1})")));
  FitConfig bad;
  bad.rigidityWeight = -1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = FitConfig{};
  bad.scaleBounds = {1.2, 1.1};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

} // namespace
