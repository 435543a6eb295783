#include "fitest/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fitest/common.hpp"

namespace fitest {

double sample_mean(std::span<const double> v) {
  if (v.empty()) throw NumericError("sample_mean: empty input");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) throw NumericError("sample_sd: need at least two values");
  const double m = sample_mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double rule_of_thumb_bandwidth(std::span<const double> x, double factor, double exponent) {
  if (factor <= 0.0) throw std::invalid_argument("rule_of_thumb_bandwidth: factor must be > 0");
  const double sd = sample_sd(x);
  if (sd == 0.0) throw NumericError("rule_of_thumb_bandwidth: degenerate covariate (zero sd)");
  return factor * sd * std::pow(static_cast<double>(x.size()), exponent);
}

double empirical_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: empty input");
  if (!(level > 0.0 && level <= 1.0))
    throw std::invalid_argument("empirical_quantile: level outside (0,1]");
  std::sort(values.begin(), values.end());
  const auto b = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(level * b));
  rank = std::min(std::max<std::size_t>(rank, 1), values.size());
  return values[rank - 1];
}

double weighted_quantile(std::span<const double> values, std::span<const double> weights,
                         double level) {
  if (values.empty() || values.size() != weights.size())
    throw std::invalid_argument("weighted_quantile: bad input sizes");
  if (!(level > 0.0 && level <= 1.0))
    throw std::invalid_argument("weighted_quantile: level outside (0,1]");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) throw std::invalid_argument("weighted_quantile: nonpositive total weight");
  double cum = 0.0;
  for (std::size_t i : order) {
    cum += weights[i];
    if (cum / total >= level) return values[i];
  }
  return values[order.back()];  // rounding slack
}

}  // namespace fitest
