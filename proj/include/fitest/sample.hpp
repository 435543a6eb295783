#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fitest {

// Observation units. A unit carries one or more outcome values (an auction
// carries all of its bids), a d-dimensional covariate, a nonnegative weight
// and an optional integer group label (bidder count, time period). Units are
// the resampling atoms of the bootstrap.
class Sample {
 public:
  explicit Sample(std::size_t dim, bool has_groups = false);

  void add_row(std::span<const double> y, std::span<const double> x, double weight = 1.0,
               long group = 0);
  void add_row(double y, std::span<const double> x, double weight = 1.0, long group = 0);

  std::size_t size() const { return y_off_.size() - 1; }
  std::size_t dim() const { return dim_; }
  bool has_groups() const { return has_groups_; }
  std::size_t total_outcomes() const { return y_.size(); }

  std::span<const double> y(std::size_t i) const {
    return {y_.data() + y_off_[i], y_off_[i + 1] - y_off_[i]};
  }
  double y_scalar(std::size_t i) const;  // throws unless the row has one outcome
  std::span<const double> x(std::size_t i) const { return {x_.data() + i * dim_, dim_}; }
  double weight(std::size_t i) const { return w_[i]; }
  long group(std::size_t i) const { return has_groups_ ? group_[i] : 0; }

  double max_weight() const;
  double min_outcome() const;
  std::vector<double> covariate_column(std::size_t d) const;
  std::size_t count_group(long g) const;

  // Throws DataError on empty sample, negative weights, or all-zero weights.
  void validate() const;

 private:
  std::size_t dim_;
  bool has_groups_;
  std::vector<double> y_;
  std::vector<std::size_t> y_off_{0};
  std::vector<double> x_;
  std::vector<double> w_;
  std::vector<long> group_;
};

Sample resample_rows(const Sample& s, std::span<const std::size_t> idx);

}  // namespace fitest
