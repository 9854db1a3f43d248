#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

namespace kinemesh::oracle {

namespace {

double nearestSquared(const Vec3& p, std::span<const Vec3> cloud, const std::vector<int>& members) {
  double best = std::numeric_limits<double>::infinity();
  for (const int j : members) {
    best = std::min(best, (p - cloud[j]).squaredNorm());
  }
  return best;
}

int nearestIndex(const Vec3& p, std::span<const Vec3> cloud, const std::vector<int>& members) {
  double best = std::numeric_limits<double>::infinity();
  int index = -1;
  for (const int j : members) {
    const double d = (p - cloud[j]).squaredNorm();
    if (d < best) {
      best = d;
      index = j;
    }
  }
  return index;
}

std::vector<int> argmaxLabels(const Eigen::MatrixXd& w) {
  std::vector<int> labels(static_cast<size_t>(w.rows()));
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    int best = 0;
    for (Eigen::Index k = 1; k < w.cols(); ++k) {
      if (w(i, k) > w(i, best)) {
        best = static_cast<int>(k);
      }
    }
    labels[i] = best;
  }
  return labels;
}

std::vector<int> all(size_t n) {
  std::vector<int> out(n);
  for (size_t i = 0; i < n; ++i) {
    out[i] = static_cast<int>(i);
  }
  return out;
}

std::set<std::pair<int, int>> faceEdges(const std::vector<Face>& faces) {
  std::set<std::pair<int, int>> edges;
  for (const auto& f : faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = f[k];
      const int b = f[(k + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  return edges;
}

} // namespace

double chamferGlobal(std::span<const Vec3> a, std::span<const Vec3> b) {
  const auto ia = all(a.size());
  const auto ib = all(b.size());
  double forward = 0.0;
  for (const auto& x : a) {
    forward += nearestSquared(x, b, ib);
  }
  double backward = 0.0;
  for (const auto& y : b) {
    backward += nearestSquared(y, a, ia);
  }
  return forward / static_cast<double>(a.size()) + backward / static_cast<double>(b.size());
}

double chamferLocal(
    std::span<const Vec3> a,
    std::span<const Vec3> b,
    const Eigen::MatrixXd& wa,
    const Eigen::MatrixXd& wb) {
  const auto la = argmaxLabels(wa);
  const auto lb = argmaxLabels(wb);
  double total = 0.0;
  int parts = 0;
  for (Eigen::Index k = 0; k < wa.cols(); ++k) {
    std::vector<int> pa;
    std::vector<int> pb;
    for (size_t i = 0; i < la.size(); ++i) {
      if (la[i] == k) {
        pa.push_back(static_cast<int>(i));
      }
    }
    for (size_t i = 0; i < lb.size(); ++i) {
      if (lb[i] == k) {
        pb.push_back(static_cast<int>(i));
      }
    }
    if (pa.empty() || pb.empty()) {
      continue;
    }
    double forward = 0.0;
    for (const int x : pa) {
      const int y = nearestIndex(a[x], b, pb);
      forward += wa(x, k) * wb(y, k) * (a[x] - b[y]).squaredNorm();
    }
    double backward = 0.0;
    for (const int y : pb) {
      const int x = nearestIndex(b[y], a, pa);
      backward += wa(x, k) * wb(y, k) * (a[x] - b[y]).squaredNorm();
    }
    total += forward / static_cast<double>(pa.size()) + backward / static_cast<double>(pb.size());
    ++parts;
  }
  return parts == 0 ? 0.0 : total / parts;
}

double symmetryLoss(std::span<const Vec3> v, const SymmetryPlane& plane) {
  const auto iv = all(v.size());
  double total = 0.0;
  for (const auto& p : v) {
    const Vec3 n = plane.normal();
    const Vec3 mirrored = p - 2.0 * (n.dot(p) - plane.offset()) * n;
    total += nearestSquared(mirrored, v, iv);
  }
  return total / static_cast<double>(v.size());
}

double laplacianLoss(const std::vector<Face>& faces, std::span<const Vec3> v) {
  std::vector<std::set<int>> neighbours(v.size());
  for (const auto& f : faces) {
    for (int k = 0; k < 3; ++k) {
      neighbours[f[k]].insert(f[(k + 1) % 3]);
      neighbours[f[k]].insert(f[(k + 2) % 3]);
    }
  }
  double total = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    if (neighbours[i].empty()) {
      continue;
    }
    Vec3 mean = Vec3::Zero();
    for (const int j : neighbours[i]) {
      mean += v[j];
    }
    mean /= static_cast<double>(neighbours[i].size());
    total += (v[i] - mean).squaredNorm();
  }
  return total / static_cast<double>(v.size());
}

double rigidityLoss(
    const std::vector<Face>& faces,
    std::span<const Vec3> current,
    std::span<const Vec3> previous) {
  const auto edges = faceEdges(faces);
  double total = 0.0;
  for (const auto& [i, j] : edges) {
    const double d = (current[i] - current[j]).norm() - (previous[i] - previous[j]).norm();
    total += d * d;
  }
  return total / static_cast<double>(edges.size());
}

Eigen::VectorXd finiteDifferenceGradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x,
    const Eigen::VectorXd& h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd plus = x;
    Eigen::VectorXd minus = x;
    plus(i) += h(i);
    minus(i) -= h(i);
    g(i) = (f(plus) - f(minus)) / (2.0 * h(i));
  }
  return g;
}

double relativeError(double a, double b, double floor) {
  const double denom = std::max({std::abs(a), std::abs(b), floor});
  return denom == 0.0 ? 0.0 : std::abs(a - b) / denom;
}

std::vector<Vec3> randomCloud(size_t n, std::mt19937_64& rng, double extent) {
  std::uniform_real_distribution<double> u(-extent, extent);
  std::vector<Vec3> out(n);
  for (auto& p : out) {
    p = Vec3(u(rng), u(rng), u(rng));
  }
  return out;
}

Eigen::MatrixXd randomStochastic(size_t rows, size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index k = 0; k < w.cols(); ++k) {
      w(i, k) = u(rng);
    }
    w.row(i) /= w.row(i).sum();
  }
  return w;
}

} // namespace kinemesh::oracle
