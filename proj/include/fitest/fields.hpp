#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fitest/sample.hpp"

namespace fitest {

// Raw per-grid estimates for the J inequality functions of one sample.
struct RawFields {
  std::vector<std::vector<double>> v_hat;      // [J][G]
  std::vector<std::vector<double>> sigma_hat;  // [J][G]; all ones when unscaled
  std::vector<std::uint8_t> usable;            // [G]
  std::size_t degenerate_fits = 0;
};

// Studentized fields u_j = r_j v_j / sigma_j, or centered bootstrap fields
// s*_j = r_j (v*_j - v_j) / sigma*_j, on a shared usability mask.
struct FieldStack {
  std::size_t J = 0;
  std::vector<std::vector<double>> u;  // [J][G]
  std::vector<std::uint8_t> usable;    // [G]
};

// Application adapter. compute() re-runs the estimators on any sample
// (original or bootstrap resample) with the bandwidths and grid fixed at
// construction; the normalization r_n and tuning scales are pinned to the
// original sample.
class FieldBuilder {
 public:
  virtual ~FieldBuilder() = default;
  virtual std::size_t num_inequalities() const = 0;
  virtual RawFields compute(const Sample& sample) const = 0;
  virtual const std::vector<double>& r_n() const = 0;
  virtual double eta_floor_scale() const = 0;     // the h^{d/2} factor of the critical value
  virtual double tuning_sample_size() const = 0;  // n entering the c_n rule
};

// u_j = r_j v_j / sigma_j with the 0/0 -> 0 convention (sigma_j = 0 forces
// v_j = 0 for the estimators used here).
FieldStack studentize(const RawFields& f, std::span<const double> r_n);

// s*_j = r_j (v*_j - v_j) / sigma*_j on the intersection of the two
// usability masks. Points where sigma* = 0 keep the draw only if v* = v
// (then s* = 0); otherwise they are dropped from the draw.
FieldStack center_bootstrap(const RawFields& original, const RawFields& boot,
                            std::span<const double> r_n);

}  // namespace fitest
