#include "fitest/grid.hpp"

#include <cmath>
#include <stdexcept>

#include "fitest/common.hpp"

namespace fitest {

namespace {

std::vector<double> midpoint_nodes(const AxisSpec& axis) {
  if (axis.count == 0) throw std::invalid_argument("EvalGrid: axis with zero cells");
  if (!(axis.hi > axis.lo)) throw std::invalid_argument("EvalGrid: axis with empty range");
  std::vector<double> nodes(axis.count);
  const double width = axis.hi - axis.lo;
  const auto n = static_cast<double>(axis.count);
  for (std::size_t k = 0; k < axis.count; ++k)
    nodes[k] = axis.lo + width * (static_cast<double>(k) + 0.5) / n;
  return nodes;
}

}  // namespace

EvalGrid EvalGrid::midpoint(const std::vector<AxisSpec>& x_axes, const AxisSpec& tau_axis) {
  if (x_axes.empty()) throw std::invalid_argument("EvalGrid: need at least one x axis");
  std::vector<std::vector<double>> xs;
  std::vector<double> spacings;
  xs.reserve(x_axes.size());
  for (const auto& a : x_axes) {
    xs.push_back(midpoint_nodes(a));
    spacings.push_back((a.hi - a.lo) / static_cast<double>(a.count));
  }
  std::vector<double> taus = midpoint_nodes(tau_axis);
  const double tau_spacing =
      taus.size() > 1 ? (tau_axis.hi - tau_axis.lo) / static_cast<double>(tau_axis.count) : 0.0;
  return EvalGrid(std::move(xs), std::move(taus), std::move(spacings), tau_spacing);
}

EvalGrid EvalGrid::midpoint_x_only(const std::vector<AxisSpec>& x_axes, double tau_value) {
  if (x_axes.empty()) throw std::invalid_argument("EvalGrid: need at least one x axis");
  std::vector<std::vector<double>> xs;
  std::vector<double> spacings;
  for (const auto& a : x_axes) {
    xs.push_back(midpoint_nodes(a));
    spacings.push_back((a.hi - a.lo) / static_cast<double>(a.count));
  }
  return EvalGrid(std::move(xs), {tau_value}, std::move(spacings), 0.0);
}

EvalGrid::EvalGrid(std::vector<std::vector<double>> x_axes, std::vector<double> tau_axis,
                   std::vector<double> x_spacing, double tau_spacing)
    : x_axes_(std::move(x_axes)), tau_axis_(std::move(tau_axis)) {
  if (x_axes_.empty() || x_axes_.size() != x_spacing.size())
    throw std::invalid_argument("EvalGrid: inconsistent axis spec");
  if (tau_axis_.empty()) throw std::invalid_argument("EvalGrid: empty tau axis");
  cell_measure_ = 1.0;
  for (double s : x_spacing) {
    if (!(s > 0.0)) throw std::invalid_argument("EvalGrid: nonpositive spacing");
    cell_measure_ *= s;
  }
  if (tau_axis_.size() > 1) {
    if (!(tau_spacing > 0.0)) throw std::invalid_argument("EvalGrid: nonpositive tau spacing");
    cell_measure_ *= tau_spacing;
  }
  finish();
}

void EvalGrid::finish() {
  for (const auto& ax : x_axes_) {
    if (ax.empty()) throw std::invalid_argument("EvalGrid: empty x axis");
    for (std::size_t i = 1; i < ax.size(); ++i)
      if (!(ax[i] > ax[i - 1])) throw std::invalid_argument("EvalGrid: axis not increasing");
  }
  for (std::size_t i = 1; i < tau_axis_.size(); ++i)
    if (!(tau_axis_[i] > tau_axis_[i - 1]))
      throw std::invalid_argument("EvalGrid: tau axis not increasing");
  size_ = tau_axis_.size();
  for (const auto& ax : x_axes_) size_ *= ax.size();
}

std::size_t EvalGrid::num_x() const { return size_ / tau_axis_.size(); }

void EvalGrid::x_at(std::size_t flat, std::span<double> out) const {
  std::size_t rest = flat / tau_axis_.size();
  for (std::size_t d = x_axes_.size(); d-- > 0;) {
    const auto& ax = x_axes_[d];
    out[d] = ax[rest % ax.size()];
    rest /= ax.size();
  }
}

std::vector<double> EvalGrid::x_point(std::size_t flat) const {
  std::vector<double> out(x_axes_.size());
  x_at(flat, out);
  return out;
}

void EvalGrid::set_tau_node(std::size_t idx, double value) {
  tau_axis_.at(idx) = value;
  finish();  // re-validate monotonicity
}

double riemann_integrate(std::span<const double> field, const EvalGrid& grid,
                         std::span<const std::uint8_t> mask) {
  if (field.size() != grid.size())
    throw NumericError("riemann_integrate: field does not conform to grid");
  if (!mask.empty() && mask.size() != grid.size())
    throw NumericError("riemann_integrate: mask does not conform to grid");
  double sum = 0.0;
  if (mask.empty()) {
    for (double v : field) sum += v;
  } else {
    for (std::size_t i = 0; i < field.size(); ++i)
      if (mask[i]) sum += field[i];
  }
  return sum * grid.cell_measure();
}

}  // namespace fitest
