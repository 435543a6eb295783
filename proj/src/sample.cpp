#include "fitest/sample.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fitest/common.hpp"

namespace fitest {

Sample::Sample(std::size_t dim, bool has_groups) : dim_(dim), has_groups_(has_groups) {
  if (dim == 0) throw std::invalid_argument("Sample: dim must be >= 1");
}

void Sample::add_row(std::span<const double> y, std::span<const double> x, double weight,
                     long group) {
  if (x.size() != dim_) throw DataError("Sample: covariate dimension mismatch");
  if (y.empty()) throw DataError("Sample: row without outcomes");
  if (!(weight >= 0.0) || !std::isfinite(weight))
    throw DataError("Sample: weight must be finite and nonnegative");
  for (double v : y)
    if (!std::isfinite(v)) throw DataError("Sample: non-finite outcome");
  for (double v : x)
    if (!std::isfinite(v)) throw DataError("Sample: non-finite covariate");
  y_.insert(y_.end(), y.begin(), y.end());
  y_off_.push_back(y_.size());
  x_.insert(x_.end(), x.begin(), x.end());
  w_.push_back(weight);
  if (has_groups_) group_.push_back(group);
}

void Sample::add_row(double y, std::span<const double> x, double weight, long group) {
  add_row(std::span<const double>(&y, 1), x, weight, group);
}

double Sample::y_scalar(std::size_t i) const {
  auto yi = y(i);
  if (yi.size() != 1) throw DataError("Sample: expected a single outcome per row");
  return yi[0];
}

double Sample::max_weight() const {
  double m = 0.0;
  for (double w : w_) m = std::max(m, w);
  return m;
}

double Sample::min_outcome() const {
  if (y_.empty()) throw DataError("Sample: empty sample");
  return *std::min_element(y_.begin(), y_.end());
}

std::vector<double> Sample::covariate_column(std::size_t d) const {
  std::vector<double> col(size());
  for (std::size_t i = 0; i < size(); ++i) col[i] = x(i)[d];
  return col;
}

std::size_t Sample::count_group(long g) const {
  if (!has_groups_) return 0;
  std::size_t c = 0;
  for (long v : group_)
    if (v == g) ++c;
  return c;
}

void Sample::validate() const {
  if (size() == 0) throw DataError("Sample: empty sample");
  bool any_positive = false;
  for (double w : w_) {
    if (w < 0.0) throw DataError("Sample: negative weight");
    if (w > 0.0) any_positive = true;
  }
  if (!any_positive) throw DataError("Sample: all weights are zero");
}

Sample resample_rows(const Sample& s, std::span<const std::size_t> idx) {
  Sample out(s.dim(), s.has_groups());
  for (std::size_t i : idx) out.add_row(s.y(i), s.x(i), s.weight(i), s.group(i));
  return out;
}

}  // namespace fitest
