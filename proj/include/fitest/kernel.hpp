#pragma once

#include <span>

namespace fitest {

enum class KernelKind { kEpanechnikovHalf };

// Compactly supported, nonnegative kernel integrating to one over its
// support. The default is K(u) = (3/2)(1 - (2u)^2) on |u| <= 1/2.
struct KernelSpec {
  KernelKind kind = KernelKind::kEpanechnikovHalf;
  double support_radius = 0.5;
};

inline double kernel_eval(const KernelSpec& spec, double u) {
  (void)spec;  // single kernel family for now
  if (u < -0.5 || u > 0.5) return 0.0;
  const double t = 2.0 * u;
  return 1.5 * (1.0 - t * t);
}

inline double kernel_peak(const KernelSpec& spec) { return kernel_eval(spec, 0.0); }

inline double product_kernel(const KernelSpec& spec, std::span<const double> u) {
  double k = 1.0;
  for (double um : u) {
    k *= kernel_eval(spec, um);
    if (k == 0.0) return 0.0;
  }
  return k;
}

}  // namespace fitest
