#include "kinemesh/common/parallel.h"

#include <cmath>
#include <cstdlib>
#include <string>

#ifdef KINEMESH_HAS_OPENMP
#include <omp.h>
#endif

namespace kinemesh {

namespace {

int defaultThreads() {
  if (const char* env = std::getenv("KINEMESH_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) {
        return n;
      }
    } catch (...) {
    }
  }
#ifdef KINEMESH_HAS_OPENMP
  return omp_get_num_procs();
#else
  return 1;
#endif
}

int gThreads = 0;

} // namespace

void setThreadCount(int threads) {
  gThreads = threads > 0 ? threads : 0;
#ifdef KINEMESH_HAS_OPENMP
  omp_set_num_threads(threadCount());
#endif
}

int threadCount() {
  return gThreads > 0 ? gThreads : defaultThreads();
}

double stableSum(std::span<const double> terms) {
  double sum = 0.0;
  double compensation = 0.0;
  for (const double t : terms) {
    const double next = sum + t;
    if (std::abs(sum) >= std::abs(t)) {
      compensation += (sum - next) + t;
    } else {
      compensation += (t - next) + sum;
    }
    sum = next;
  }
  return sum + compensation;
}

double stableMean(std::span<const double> terms) {
  if (terms.empty()) {
    return 0.0;
  }
  return stableSum(terms) / static_cast<double>(terms.size());
}

} // namespace kinemesh
