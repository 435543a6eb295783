#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fitest {

// v^p for integer p >= 1, by repeated multiplication (deterministic, fast).
inline double int_pow(double v, int p) {
  double out = v;
  for (int i = 1; i < p; ++i) out *= v;
  return out;
}

double sample_mean(std::span<const double> v);

// Sample standard deviation, denominator n - 1.
double sample_sd(std::span<const double> v);

// h = factor * sd(x) * n^exponent. Throws NumericError when sd(x) == 0.
double rule_of_thumb_bandwidth(std::span<const double> x, double factor, double exponent);

// Left-continuous order-statistic quantile: the smallest value v with
// #{values <= v} / B >= level. level must lie in (0, 1].
double empirical_quantile(std::vector<double> values, double level);

// Weighted version used by the exact bootstrap enumeration: smallest value
// with cumulative weight share >= level.
double weighted_quantile(std::span<const double> values, std::span<const double> weights,
                         double level);

}  // namespace fitest
