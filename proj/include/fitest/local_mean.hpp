#pragma once

#include <cstdint>
#include <vector>

#include "fitest/grid.hpp"
#include "fitest/kernel.hpp"
#include "fitest/sample.hpp"

namespace fitest {

struct MeanField {
  std::vector<double> v_hat;
  std::vector<double> sigma_hat;
  std::vector<double> effective_mass;  // sum_i w_i K((X_i - x)/h)
  std::vector<std::uint8_t> usable;
};

// Local constant regression field and its scale companion:
//   v(x)       = (n h^d)^-1 sum_i w_i (Y_i - y_shift)   K((X_i - x)/h)
//   sigma^2(x) = (n h^d)^-1 sum_i (w_i (Y_i - y_shift))^2 K((X_i - x)/h)^2
// A grid point is usable when its weighted kernel mass reaches the
// equivalent of mass_floor_obs max-weight observations sitting at the
// kernel peak. sigma(x) = 0 forces v(x) = 0 (every term vanishes), so the
// studentized field uses the 0/0 -> 0 convention downstream.
MeanField local_constant_mean(const Sample& sample, const EvalGrid& grid, double h,
                              const KernelSpec& kernel = {}, double mass_floor_obs = 5.0,
                              double y_shift = 0.0);

}  // namespace fitest
