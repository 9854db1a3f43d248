#pragma once

#include <cstddef>
#include <span>

namespace kinemesh {

// Caps the number of worker threads used by internal loops. 0 restores the default,
// which honours the KINEMESH_THREADS environment variable.
void setThreadCount(int threads);
int threadCount();

// Compensated (Neumaier) summation in index order. Results do not depend on how the
// terms were produced, so parallel loops write per-item terms and reduce with this.
double stableSum(std::span<const double> terms);

// Arithmetic mean via stableSum; 0 for an empty span.
double stableMean(std::span<const double> terms);

} // namespace kinemesh
