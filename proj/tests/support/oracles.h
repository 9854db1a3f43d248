#pragma once

#include "kinemesh/geometry/symmetry.h"
#include "kinemesh/geometry/tri_mesh.h"

#include <Eigen/Core>

#include <functional>
#include <random>
#include <span>
#include <vector>

// Straightforward reference implementations, written independently of the library code
// they check: O(N^2) scans, explicit per-face adjacency, central differences.
namespace kinemesh::oracle {

double chamferGlobal(std::span<const Vec3> a, std::span<const Vec3> b);

// Parts are the argmax bones of each weight row (lowest index on ties).
double chamferLocal(
    std::span<const Vec3> a,
    std::span<const Vec3> b,
    const Eigen::MatrixXd& wa,
    const Eigen::MatrixXd& wb);

double symmetryLoss(std::span<const Vec3> v, const SymmetryPlane& plane);

double laplacianLoss(const std::vector<Face>& faces, std::span<const Vec3> v);

double rigidityLoss(
    const std::vector<Face>& faces,
    std::span<const Vec3> current,
    std::span<const Vec3> previous);

// Central differences with a per-component step h(i).
Eigen::VectorXd finiteDifferenceGradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x,
    const Eigen::VectorXd& h);

// |a - b| / max(|a|, |b|, floor).
double relativeError(double a, double b, double floor = 1e-300);

std::vector<Vec3> randomCloud(size_t n, std::mt19937_64& rng, double extent = 1.0);

// Dense random row-stochastic matrix.
Eigen::MatrixXd randomStochastic(size_t rows, size_t cols, std::mt19937_64& rng);

} // namespace kinemesh::oracle
