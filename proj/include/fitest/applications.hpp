#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "fitest/fields.hpp"
#include "fitest/grid.hpp"
#include "fitest/kernel.hpp"
#include "fitest/local_mean.hpp"
#include "fitest/quantile_reg.hpp"

namespace fitest {

// ---------------------------------------------------------------------------
// Mean inequality: H0: E[Y - theta | X = x] <= 0 on the grid region. J = 1,
// studentized by the local scale field, r_n = sqrt(n h^d).
// ---------------------------------------------------------------------------

struct MeanInequalitySpec {
  double theta = 0.0;
  double mass_floor_obs = 5.0;
};

class MeanFieldBuilder final : public FieldBuilder {
 public:
  MeanFieldBuilder(const Sample& original, MeanInequalitySpec spec, const EvalGrid& grid,
                   double h, KernelSpec kernel = {});

  std::size_t num_inequalities() const override { return 1; }
  RawFields compute(const Sample& sample) const override;
  const std::vector<double>& r_n() const override { return r_n_; }
  double eta_floor_scale() const override { return eta_floor_scale_; }
  double tuning_sample_size() const override { return n_tune_; }

 private:
  MeanInequalitySpec spec_;
  const EvalGrid* grid_;
  double h_;
  KernelSpec kernel_;
  std::vector<double> r_n_;
  double eta_floor_scale_;
  double n_tune_;
};

// ---------------------------------------------------------------------------
// Auction bid-quantile inequalities. With q_k(tau|x) the conditional bid
// quantile for k-bidder auctions and b_low the lower support endpoint,
//   v_1 = q_2 - q_3   and   v_2 = b_low - 2 q_2 + q_3
// must both be <= 0. Quantiles come from local polynomial quantile
// regression on the pooled bids of each group; sigma == 1, r_n = sqrt(n h^d)
// with n the number of auctions.
// ---------------------------------------------------------------------------

enum class BLowerMode { kSampleMin, kSupplied };

struct AuctionSpec {
  std::pair<long, long> bidder_counts = {2, 3};
  int poly_order = 1;
  BLowerMode b_lower_mode = BLowerMode::kSampleMin;
  double b_lower_supplied = 0.0;
  double mass_floor_obs = 5.0;
};

class AuctionFieldBuilder final : public FieldBuilder {
 public:
  AuctionFieldBuilder(const Sample& original, AuctionSpec spec, const EvalGrid& grid, double h,
                      KernelSpec kernel = {});

  std::size_t num_inequalities() const override { return 2; }
  RawFields compute(const Sample& sample) const override;
  const std::vector<double>& r_n() const override { return r_n_; }
  double eta_floor_scale() const override { return eta_floor_scale_; }
  double tuning_sample_size() const override { return n_tune_; }

 private:
  AuctionSpec spec_;
  const EvalGrid* grid_;
  double h_;
  KernelSpec kernel_;
  std::vector<double> r_n_;
  double eta_floor_scale_;
  double n_tune_;
};

// ---------------------------------------------------------------------------
// Difference-in-differences in conditional quantiles between periods t and s:
//   Delta(tau, x) = [q_t(tau|x) - q_s(tau|x)] - [q_t(.5|x) - q_s(.5|x)]
// tested for Delta >= 0, so v = -Delta. J = 1, sigma == 1, and
//   r_n = sqrt( (n_t h_t)(n_s h_s) / ((n_t h_t) + (n_s h_s)) )
// reflects the two sample sizes. The eta floor uses h = sqrt(h_t h_s) and
// the c_n rule uses the average period size.
// ---------------------------------------------------------------------------

struct DiDSpec {
  long period_t = 0;
  long period_s = 0;
  double h_t = 0.0;
  double h_s = 0.0;
  int poly_order = 1;
  double mass_floor_obs = 5.0;
};

class DiDFieldBuilder final : public FieldBuilder {
 public:
  DiDFieldBuilder(const Sample& original, DiDSpec spec, const EvalGrid& grid,
                  KernelSpec kernel = {});

  std::size_t num_inequalities() const override { return 1; }
  RawFields compute(const Sample& sample) const override;
  const std::vector<double>& r_n() const override { return r_n_; }
  double eta_floor_scale() const override { return eta_floor_scale_; }
  double tuning_sample_size() const override { return n_tune_; }

 private:
  DiDSpec spec_;
  const EvalGrid* grid_;
  EvalGrid median_grid_;  // same x axes, singleton tau = 0.5
  KernelSpec kernel_;
  std::vector<double> r_n_;
  double eta_floor_scale_;
  double n_tune_;
};

// --- grid helpers ------------------------------------------------------------

EvalGrid make_mean_grid(double x_lo, double x_hi, std::size_t nx = 101);

// X between the given covariate quantiles of the pooled sample (d = 1), tau
// a midpoint grid on [tau_lo, tau_hi].
EvalGrid make_auction_grid(const Sample& sample, std::size_t nx = 101, std::size_t n_tau = 20,
                           double tau_lo = 0.1, double tau_hi = 0.9,
                           double x_quantile_trim = 0.1);

// Midpoint tau grid with the node nearest 0.5 pinned to exactly 0.5 so the
// median row is an identity. Throws unless such a node exists.
EvalGrid make_did_grid(double x_lo, double x_hi, std::size_t nx = 101, std::size_t n_tau = 17,
                       double tau_lo = 0.1, double tau_hi = 0.9);

// Optional covariate normalization for auction data: studentize, then apply
// the standard normal CDF, mapping x into (0,1).
Sample normalize_covariate_gauss_rank(const Sample& sample);

}  // namespace fitest
