#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "fitest/quantile_reg.hpp"
#include "fitest/rng.hpp"
#include "fitest/sample.hpp"

namespace testutil {

inline fitest::Sample make_mean_sample(std::span<const double> y, std::span<const double> x) {
  fitest::Sample s(1);
  for (std::size_t i = 0; i < y.size(); ++i)
    s.add_row(y[i], std::span<const double>(&x[i], 1));
  return s;
}

inline fitest::Sample random_mean_sample(fitest::RandomSource& rng, std::size_t n, double x_lo,
                                         double x_hi, double y_scale = 1.0) {
  fitest::Sample s(1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(x_lo, x_hi);
    const double y = y_scale * rng.normal();
    s.add_row(y, std::span<const double>(&x, 1));
  }
  return s;
}

// Exhaustive basic-solution search: the check-loss program is piecewise
// linear, so some optimum interpolates k observations exactly. Independent
// of the simplex path used by the implementation.
inline double qr_enumeration_oracle(std::span<const double> design, std::size_t m, std::size_t k,
                                    std::span<const double> y, std::span<const double> w,
                                    double tau) {
  std::vector<std::size_t> pick(k);
  std::vector<double> mat(k * k), rhs(k), gamma(k);
  double best = 1e300;
  auto solve_subset = [&]() -> bool {
    // Gaussian elimination with partial pivoting
    for (std::size_t l = 0; l < k; ++l) {
      for (std::size_t j = 0; j < k; ++j) mat[l * k + j] = design[pick[l] * k + j];
      rhs[l] = y[pick[l]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t piv = c;
      for (std::size_t r2 = c + 1; r2 < k; ++r2)
        if (std::fabs(mat[r2 * k + c]) > std::fabs(mat[piv * k + c])) piv = r2;
      if (std::fabs(mat[piv * k + c]) < 1e-11) return false;
      std::swap(rhs[c], rhs[piv]);
      for (std::size_t j = 0; j < k; ++j) std::swap(mat[c * k + j], mat[piv * k + j]);
      for (std::size_t r2 = c + 1; r2 < k; ++r2) {
        const double f = mat[r2 * k + c] / mat[c * k + c];
        for (std::size_t j = c; j < k; ++j) mat[r2 * k + j] -= f * mat[c * k + j];
        rhs[r2] -= f * rhs[c];
      }
    }
    for (std::size_t i = k; i-- > 0;) {
      double s = rhs[i];
      for (std::size_t j = i + 1; j < k; ++j) s -= mat[i * k + j] * gamma[j];
      gamma[i] = s / mat[i * k + i];
    }
    return true;
  };
  auto objective = [&]() {
    double obj = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double r = y[i];
      for (std::size_t j = 0; j < k; ++j) r -= design[i * k + j] * gamma[j];
      obj += w[i] * fitest::check_loss(r, tau);
    }
    return obj;
  };
  // iterate k-subsets
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  for (;;) {
    if (solve_subset()) best = std::min(best, objective());
    std::size_t i = k;
    while (i-- > 0) {
      if (pick[i] + (k - i) < m) {
        ++pick[i];
        for (std::size_t j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
        break;
      }
      if (i == 0) return best;
    }
  }
}

}  // namespace testutil
