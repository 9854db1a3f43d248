#include "kinemesh/common/error.h"
#include "kinemesh/deform/blend_skin.h"
#include "kinemesh/deform/regularizers.h"
#include "kinemesh/geometry/mesh_io.h"
#include "kinemesh/geometry/primitives.h"

#include "oracles.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

using namespace kinemesh;

namespace {

RigidTransform randomTransform(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return RigidTransform::fromRotationVector(Vec3(g(rng), g(rng), g(rng)), Vec3(g(rng), g(rng), g(rng)));
}

TriMesh randomMesh(size_t n, std::mt19937_64& rng) {
  const auto cloud = oracle::randomCloud(n, rng);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
  std::vector<Face> faces;
  while (faces.size() < 2 * n) {
    const Face f{pick(rng), pick(rng), pick(rng)};
    if (f[0] != f[1] && f[1] != f[2] && f[0] != f[2]) {
      faces.push_back(f);
    }
  }
  return TriMesh(cloud, faces);
}

std::vector<Vec3> transformed(std::span<const Vec3> points, const RigidTransform& t, double scale = 1.0) {
  std::vector<Vec3> out;
  for (const auto& p : points) {
    out.push_back(t.apply(scale * p));
  }
  return out;
}

TEST(BlendSkin, IdentityTransformsReproduceCanonicalExactly) {
  std::mt19937_64 rng(1);
  const TriMesh m = randomMesh(60, rng);
  const SkinWeights w(oracle::randomStochastic(60, 4, rng));
  const std::vector<RigidTransform> bones(4);
  const DeformedMesh posed = blendSkin(m, w, RigidTransform::identity(), bones, 3);
  EXPECT_EQ(posed.vertices(), m.vertices());
  EXPECT_EQ(posed.frameIndex, 3);

  RigidTransform shift;
  shift.translation = Vec3(1, -2, 0.5);
  const DeformedMesh moved = blendSkin(m, w, shift, bones);
  for (size_t i = 0; i < m.vertexCount(); ++i) {
    EXPECT_EQ(moved.vertices()[i], m.vertex(i) + shift.translation);
  }
}

TEST(BlendSkin, OneHotMatchesDirectApplication) {
  std::mt19937_64 rng(2);
  const TriMesh m = randomMesh(80, rng);
  std::vector<int> labels;
  std::uniform_int_distribution<int> pick(0, 4);
  for (size_t i = 0; i < m.vertexCount(); ++i) {
    labels.push_back(pick(rng));
  }
  std::vector<RigidTransform> bones;
  for (int b = 0; b < 5; ++b) {
    bones.push_back(randomTransform(rng));
  }
  const RigidTransform root = randomTransform(rng);
  const DeformedMesh posed = blendSkin(m, SkinWeights::oneHot(labels, 5), root, bones);
  for (size_t i = 0; i < m.vertexCount(); ++i) {
    EXPECT_LT((posed.vertices()[i] - root.apply(bones[labels[i]].apply(m.vertex(i)))).norm(), 1e-12);
  }
}

TEST(BlendSkin, MatchesMatrixBlend) {
  std::mt19937_64 rng(3);
  const TriMesh m = randomMesh(50, rng);
  const Eigen::MatrixXd w = oracle::randomStochastic(50, 3, rng);
  std::vector<RigidTransform> bones;
  for (int b = 0; b < 3; ++b) {
    bones.push_back(randomTransform(rng));
  }
  const RigidTransform root = randomTransform(rng);
  const DeformedMesh posed = blendSkin(m, SkinWeights(w), root, bones);
  for (size_t i = 0; i < m.vertexCount(); ++i) {
    Eigen::Matrix4d blend = Eigen::Matrix4d::Zero();
    for (int b = 0; b < 3; ++b) {
      Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
      h.topLeftCorner<3, 3>() = bones[b].rotationMatrix();
      h.topRightCorner<3, 1>() = bones[b].translation;
      blend += w(i, b) * h;
    }
    const Vec3 local = (blend * m.vertex(i).homogeneous()).head<3>();
    EXPECT_LT((posed.vertices()[i] - root.apply(local)).norm(), 1e-12);
  }
}

TEST(BlendSkin, LinearInCanonicalPositions) {
  std::mt19937_64 rng(4);
  const TriMesh m = randomMesh(40, rng);
  const SkinWeights w(oracle::randomStochastic(40, 3, rng));
  std::vector<RigidTransform> bones;
  for (int b = 0; b < 3; ++b) {
    bones.push_back(randomTransform(rng));
  }
  // Affine in X0: posed(aX + bY) - T(0) = a (posed(X) - T(0)) + b (posed(Y) - T(0)).
  const auto y = oracle::randomCloud(40, rng);
  const double alpha = 0.7;
  const double beta = -1.3;
  std::vector<Vec3> mix;
  for (size_t i = 0; i < 40; ++i) {
    mix.push_back(alpha * m.vertex(i) + beta * y[i]);
  }
  const RigidTransform root = randomTransform(rng);
  const auto px = blendSkin(m, w, root, bones).vertices();
  const auto py = blendSkin(TriMesh(y, m.faces()), w, root, bones).vertices();
  const auto pm = blendSkin(TriMesh(mix, m.faces()), w, root, bones).vertices();
  const auto p0 = blendSkin(TriMesh(std::vector<Vec3>(40, Vec3::Zero()), m.faces()), w, root, bones).vertices();
  for (size_t i = 0; i < 40; ++i) {
    const Vec3 expected = alpha * (px[i] - p0[i]) + beta * (py[i] - p0[i]) + p0[i];
    EXPECT_LT((pm[i] - expected).norm(), 1e-12);
  }
}

TEST(BlendSkin, DimensionMismatchThrows) {
  std::mt19937_64 rng(5);
  const TriMesh m = randomMesh(10, rng);
  const SkinWeights w(oracle::randomStochastic(9, 2, rng));
  const std::vector<RigidTransform> bones(2);
  EXPECT_THROW(blendSkin(m, w, RigidTransform::identity(), bones), DimensionError);
  const SkinWeights ok(oracle::randomStochastic(10, 2, rng));
  const std::vector<RigidTransform> three(3);
  EXPECT_THROW(blendSkin(m, ok, RigidTransform::identity(), three), DimensionError);
}

TEST(BlendSkin, WritesNumberedFrameFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "kinemesh_deform_test_frames";
  std::filesystem::remove_all(dir);
  const TriMesh m = makeBox(Vec3::Zero(), Vec3::Ones());
  std::vector<DeformedMesh> frames{{m, 0}, {m, 1}, {m, 2}};
  const auto paths = writeFrameSequence(dir, frames);
  ASSERT_EQ(paths.size(), 3u);
  EXPECT_EQ(paths[0].filename(), "frame_0000.obj");
  EXPECT_EQ(paths[2].filename(), "frame_0002.obj");
  EXPECT_EQ(loadMesh(paths[1]).vertices(), m.vertices());
  std::filesystem::remove_all(dir);
}

TEST(SymmetryLoss, Examples) {
  const std::vector<Vec3> symmetric{{1, 0, 0}, {-1, 0, 0}, {0.5, 2, 1}, {-0.5, 2, 1}, {0, 3, 3}};
  EXPECT_NEAR(symmetryLoss(std::span<const Vec3>(symmetric)), 0.0, 1e-12);
  const double d = 0.7;
  const std::vector<Vec3> single{{d, 1, 2}};
  EXPECT_DOUBLE_EQ(symmetryLoss(std::span<const Vec3>(single)), 4 * d * d);
  const std::vector<Vec3> asymmetric{{1, 0, 0}, {-1.2, 0, 0}};
  EXPECT_GT(symmetryLoss(std::span<const Vec3>(asymmetric)), 0.0);
}

TEST(SymmetryLoss, MatchesBruteForce) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const auto cloud = oracle::randomCloud(400, rng);
    const SymmetryPlane plane(Vec3(0.2, 1.0, -0.3), 0.1 * trial);
    EXPECT_LT(oracle::relativeError(symmetryLoss(cloud, plane), oracle::symmetryLoss(cloud, plane)), 1e-12);
  }
}

TEST(SymmetryLoss, ZeroForMirroredSets) {
  std::mt19937_64 rng(7);
  const SymmetryPlane plane(Vec3(1, 1, 0), 0.3);
  auto cloud = oracle::randomCloud(100, rng);
  const size_t n = cloud.size();
  for (size_t i = 0; i < n; ++i) {
    cloud.push_back(plane.reflect(cloud[i]));
  }
  EXPECT_LT(symmetryLoss(cloud, plane), 1e-24);
  cloud.pop_back();
  EXPECT_GT(symmetryLoss(cloud, plane), 0.0);
}

TEST(LaplacianLoss, Examples) {
  const TriMesh coincident(std::vector<Vec3>(5, Vec3(1, 2, 3)), {{0, 1, 2}, {2, 3, 4}});
  EXPECT_EQ(laplacianLoss(coincident), 0.0);

  const TriMesh grid = makeGrid(6, 6, 1.0);
  EXPECT_NEAR(laplacianLoss(grid), oracle::laplacianLoss(grid.faces(), grid.vertices()), 1e-14);
  for (size_t i = 0; i < grid.vertexCount(); ++i) {
    const Vec3& p = grid.vertex(i);
    const bool interior = p.x() > 1e-9 && p.y() > 1e-9 && p.x() < 6 - 1e-9 && p.y() < 6 - 1e-9;
    if (interior) {
      Vec3 mean = Vec3::Zero();
      for (const int j : grid.neighbors()[i]) {
        mean += grid.vertex(j);
      }
      mean /= static_cast<double>(grid.neighbors()[i].size());
      EXPECT_LT((p - mean).norm(), 1e-12);
    }
  }
}

TEST(LaplacianLoss, MatchesNaiveAndIsolatedVerticesAreZero) {
  std::mt19937_64 rng(8);
  TriMesh m = randomMesh(100, rng);
  EXPECT_LT(oracle::relativeError(laplacianLoss(m), oracle::laplacianLoss(m.faces(), m.vertices())), 1e-12);
  std::vector<Vec3> v = m.vertices();
  v.push_back(Vec3(100, 100, 100));
  const TriMesh withIsolated(v, m.faces());
  EXPECT_NEAR(laplacianLoss(withIsolated) * 101.0, laplacianLoss(m) * 100.0, 1e-10);
}

TEST(DynamicRigidity, Examples) {
  std::mt19937_64 rng(9);
  const TriMesh m = randomMesh(60, rng);
  EXPECT_EQ(dynamicRigidityLoss(m, m.vertices(), m.vertices()), 0.0);
  const auto moved = transformed(m.vertices(), randomTransform(rng));
  EXPECT_LT(dynamicRigidityLoss(m, moved, m.vertices()), 1e-10);

  // Two equilateral triangles: every edge has length 1.
  const TriMesh strip({{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0}, {1.5, std::sqrt(3.0) / 2, 0}}, {{0, 1, 2}, {1, 3, 2}});
  for (const double s : {0.5, 0.9, 1.0, 1.3}) {
    const auto scaled = transformed(strip.vertices(), RigidTransform::identity(), s);
    EXPECT_NEAR(dynamicRigidityLoss(strip, scaled, strip.vertices()), (s - 1) * (s - 1), 1e-14);
  }
}

TEST(DynamicRigidity, MatchesOracleAndCommonRigidInvariance) {
  std::mt19937_64 rng(10);
  const TriMesh m = randomMesh(80, rng);
  const auto current = oracle::randomCloud(80, rng);
  const double value = dynamicRigidityLoss(m, current, m.vertices());
  EXPECT_LT(oracle::relativeError(value, oracle::rigidityLoss(m.faces(), current, m.vertices())), 1e-12);
  const RigidTransform t = randomTransform(rng);
  EXPECT_LT(oracle::relativeError(dynamicRigidityLoss(m, transformed(current, t), transformed(m.vertices(), t)), value), 1e-10);
}

TEST(DynamicRigidity, MismatchedBasesThrow) {
  std::mt19937_64 rng(11);
  const DeformedMesh a{randomMesh(20, rng), 0};
  const DeformedMesh b{randomMesh(20, rng), 1};
  EXPECT_THROW(dynamicRigidityLoss(a, b), DimensionError);
  const DeformedMesh c{TriMesh(oracle::randomCloud(20, rng), a.mesh.faces()), 1};
  EXPECT_NO_THROW(dynamicRigidityLoss(c, a));
}

TEST(Regularizers, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(12);
  const TriMesh m = randomMesh(30, rng);
  const auto previous = oracle::randomCloud(30, rng);
  const SymmetryPlane plane(Vec3(1, 0.2, 0), 0.05);
  const auto partners = symmetryPartners(m.vertices(), plane);

  auto unpack = [](const Eigen::VectorXd& x) {
    std::vector<Vec3> v(x.size() / 3);
    for (size_t i = 0; i < v.size(); ++i) {
      v[i] = x.segment<3>(3 * i);
    }
    return v;
  };
  Eigen::VectorXd x(3 * m.vertexCount());
  for (size_t i = 0; i < m.vertexCount(); ++i) {
    x.segment<3>(3 * i) = m.vertex(i);
  }
  const Eigen::VectorXd h = Eigen::VectorXd::Constant(x.size(), 1e-6);

  const std::vector<std::function<double(std::span<const Vec3>, std::vector<Vec3>*)>> losses{
      [&](std::span<const Vec3> v, std::vector<Vec3>* g) { return symmetryLoss(v, plane, partners, g); },
      [&](std::span<const Vec3> v, std::vector<Vec3>* g) { return laplacianLoss(m, v, g); },
      [&](std::span<const Vec3> v, std::vector<Vec3>* g) { return dynamicRigidityLoss(m, v, previous, g); },
  };
  for (const auto& loss : losses) {
    std::vector<Vec3> gradient;
    loss(m.vertices(), &gradient);
    const Eigen::VectorXd fd = oracle::finiteDifferenceGradient(
        [&](const Eigen::VectorXd& y) { return loss(unpack(y), nullptr); }, x, h);
    for (size_t i = 0; i < m.vertexCount(); ++i) {
      EXPECT_LT((gradient[i] - fd.segment<3>(3 * i)).norm(), 1e-7 * std::max(1.0, fd.norm()));
    }
  }
}

} // namespace
