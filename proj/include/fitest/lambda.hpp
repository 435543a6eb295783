#pragma once

#include <algorithm>
#include <cstdint>
#include <span>

#include "fitest/numerics.hpp"

namespace fitest {

enum class LambdaForm { kMax, kSum };

inline double positive_part(double v) { return v > 0.0 ? v : 0.0; }

// One-sided aggregator of the J inequality values:
//   max form: (max_j [v_j]_+)^p      sum form: sum_j [v_j]_+^p
inline double lambda_p(std::span<const double> v, int p, LambdaForm form) {
  if (form == LambdaForm::kMax) {
    double m = 0.0;
    for (double vj : v) m = std::max(m, vj);
    return m > 0.0 ? int_pow(m, p) : 0.0;
  }
  double s = 0.0;
  for (double vj : v)
    if (vj > 0.0) s += int_pow(vj, p);
  return s;
}

// Censored aggregator: entries with index outside the bitmask a_mask are
// zeroed before applying lambda_p. a_mask must be nonzero.
inline double lambda_A_p(std::span<const double> v, std::uint32_t a_mask, int p,
                         LambdaForm form) {
  if (form == LambdaForm::kMax) {
    double m = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j)
      if ((a_mask >> j) & 1u) m = std::max(m, v[j]);
    return m > 0.0 ? int_pow(m, p) : 0.0;
  }
  double s = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j)
    if (((a_mask >> j) & 1u) && v[j] > 0.0) s += int_pow(v[j], p);
  return s;
}

}  // namespace fitest
