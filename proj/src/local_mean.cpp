#include "fitest/local_mean.hpp"

#include <cmath>
#include <stdexcept>

#include "fitest/common.hpp"
#include "fitest/numerics.hpp"

namespace fitest {

MeanField local_constant_mean(const Sample& sample, const EvalGrid& grid, double h,
                              const KernelSpec& kernel, double mass_floor_obs, double y_shift) {
  if (!(h > 0.0)) throw std::invalid_argument("local_constant_mean: h must be > 0");
  if (sample.size() == 0) throw DataError("local_constant_mean: empty sample");
  const std::size_t n = sample.size();
  const std::size_t d = sample.dim();
  if (grid.dim() != d) throw NumericError("local_constant_mean: grid dimension mismatch");

  const double nh_d = static_cast<double>(n) * int_pow(h, static_cast<int>(d));
  const double mass_floor =
      mass_floor_obs * sample.max_weight() * int_pow(kernel_peak(kernel), static_cast<int>(d));

  MeanField out;
  const std::size_t g = grid.size();
  out.v_hat.assign(g, 0.0);
  out.sigma_hat.assign(g, 0.0);
  out.effective_mass.assign(g, 0.0);
  out.usable.assign(g, 0);

  std::vector<double> xg(d), u(d);
  for (std::size_t p = 0; p < g; ++p) {
    grid.x_at(p, xg);
    double sv = 0.0, ss = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto xi = sample.x(i);
      for (std::size_t m = 0; m < d; ++m) u[m] = (xi[m] - xg[m]) / h;
      const double k = product_kernel(kernel, u);
      if (k == 0.0) continue;
      const double wy = sample.weight(i) * (sample.y_scalar(i) - y_shift);
      sv += wy * k;
      ss += wy * wy * k * k;
      mass += sample.weight(i) * k;
    }
    out.v_hat[p] = sv / nh_d;
    out.sigma_hat[p] = std::sqrt(ss / nh_d);
    out.effective_mass[p] = mass;
    out.usable[p] = (mass > 0.0 && mass >= mass_floor) ? 1 : 0;
  }
  return out;
}

}  // namespace fitest
