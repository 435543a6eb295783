#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fitest {

struct AxisSpec {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

// Finite product grid over X x T with uniform midpoint cells. The tau axis
// may be a singleton, in which case tau carries no measure and the cell
// measure is the product of the x spacings alone. Flat indices run with tau
// fastest, then the last x axis.
class EvalGrid {
 public:
  EvalGrid() = default;

  // Midpoint grid: count cells per axis, nodes at the cell centers.
  static EvalGrid midpoint(const std::vector<AxisSpec>& x_axes, const AxisSpec& tau_axis);
  static EvalGrid midpoint_x_only(const std::vector<AxisSpec>& x_axes, double tau_value);

  // Explicit axes; spacing arguments set the (uniform) cell measure.
  EvalGrid(std::vector<std::vector<double>> x_axes, std::vector<double> tau_axis,
           std::vector<double> x_spacing, double tau_spacing);

  std::size_t dim() const { return x_axes_.size(); }
  std::size_t size() const { return size_; }
  std::size_t num_tau() const { return tau_axis_.size(); }
  std::size_t num_x() const;
  bool tau_has_measure() const { return tau_axis_.size() > 1; }
  double cell_measure() const { return cell_measure_; }
  double total_measure() const { return cell_measure_ * static_cast<double>(size_); }

  const std::vector<double>& x_axis(std::size_t d) const { return x_axes_[d]; }
  const std::vector<double>& tau_axis() const { return tau_axis_; }

  std::size_t tau_index(std::size_t flat) const { return flat % tau_axis_.size(); }
  double tau_at(std::size_t flat) const { return tau_axis_[flat % tau_axis_.size()]; }
  void x_at(std::size_t flat, std::span<double> out) const;
  std::vector<double> x_point(std::size_t flat) const;

  // Replace one tau node (used to pin the DiD median row at exactly 0.5).
  void set_tau_node(std::size_t idx, double value);

 private:
  void finish();

  std::vector<std::vector<double>> x_axes_;
  std::vector<double> tau_axis_;
  double cell_measure_ = 0.0;
  std::size_t size_ = 0;
};

// Sum of field * cell_measure over unmasked grid points, accumulated in flat
// index order. An empty mask means "all points".
double riemann_integrate(std::span<const double> field, const EvalGrid& grid,
                         std::span<const std::uint8_t> mask = {});

}  // namespace fitest
