#include "fitest/applications.hpp"

#include <cmath>
#include <stdexcept>

#include "fitest/common.hpp"
#include "fitest/numerics.hpp"
#include "fitest/rng.hpp"

namespace fitest {

// --- mean -------------------------------------------------------------------

MeanFieldBuilder::MeanFieldBuilder(const Sample& original, MeanInequalitySpec spec,
                                   const EvalGrid& grid, double h, KernelSpec kernel)
    : spec_(spec), grid_(&grid), h_(h), kernel_(kernel) {
  if (!(h > 0.0)) throw ConfigError("MeanFieldBuilder: h must be > 0");
  original.validate();
  const auto n = static_cast<double>(original.size());
  const auto d = static_cast<int>(original.dim());
  r_n_ = {std::sqrt(n * int_pow(h, d))};
  eta_floor_scale_ = std::sqrt(int_pow(h, d));
  n_tune_ = n;
}

RawFields MeanFieldBuilder::compute(const Sample& sample) const {
  MeanField f =
      local_constant_mean(sample, *grid_, h_, kernel_, spec_.mass_floor_obs, spec_.theta);
  RawFields out;
  out.v_hat.push_back(std::move(f.v_hat));
  out.sigma_hat.push_back(std::move(f.sigma_hat));
  out.usable = std::move(f.usable);
  return out;
}

// --- auction ----------------------------------------------------------------

AuctionFieldBuilder::AuctionFieldBuilder(const Sample& original, AuctionSpec spec,
                                         const EvalGrid& grid, double h, KernelSpec kernel)
    : spec_(spec), grid_(&grid), h_(h), kernel_(kernel) {
  if (!(h > 0.0)) throw ConfigError("AuctionFieldBuilder: h must be > 0");
  original.validate();
  if (!original.has_groups()) throw DataError("AuctionFieldBuilder: sample has no bidder counts");
  for (long k : {spec.bidder_counts.first, spec.bidder_counts.second})
    if (original.count_group(k) == 0)
      throw DataError("AuctionFieldBuilder: no auctions with bidder count " + std::to_string(k));
  const auto n = static_cast<double>(original.size());
  const auto d = static_cast<int>(original.dim());
  const double rn = std::sqrt(n * int_pow(h, d));
  r_n_ = {rn, rn};
  eta_floor_scale_ = std::sqrt(int_pow(h, d));
  n_tune_ = n;
}

RawFields AuctionFieldBuilder::compute(const Sample& sample) const {
  const QuantileSurface q2 = quantile_surface(sample, *grid_, h_, spec_.poly_order,
                                              spec_.bidder_counts.first, kernel_,
                                              spec_.mass_floor_obs);
  const QuantileSurface q3 = quantile_surface(sample, *grid_, h_, spec_.poly_order,
                                              spec_.bidder_counts.second, kernel_,
                                              spec_.mass_floor_obs);
  const double b_low =
      spec_.b_lower_mode == BLowerMode::kSampleMin ? sample.min_outcome() : spec_.b_lower_supplied;

  const std::size_t g = grid_->size();
  RawFields out;
  out.v_hat.assign(2, std::vector<double>(g, 0.0));
  out.sigma_hat.assign(2, std::vector<double>(g, 1.0));
  out.usable.assign(g, 0);
  out.degenerate_fits = q2.degenerate_fits + q3.degenerate_fits;
  for (std::size_t p = 0; p < g; ++p) {
    if (!q2.usable[p] || !q3.usable[p]) continue;
    out.usable[p] = 1;
    out.v_hat[0][p] = q2.q_hat[p] - q3.q_hat[p];
    out.v_hat[1][p] = b_low - 2.0 * q2.q_hat[p] + q3.q_hat[p];
  }
  return out;
}

// --- difference-in-differences ------------------------------------------------

DiDFieldBuilder::DiDFieldBuilder(const Sample& original, DiDSpec spec, const EvalGrid& grid,
                                 KernelSpec kernel)
    : spec_(spec), grid_(&grid), kernel_(kernel) {
  if (!(spec.h_t > 0.0) || !(spec.h_s > 0.0))
    throw ConfigError("DiDFieldBuilder: bandwidths must be > 0");
  original.validate();
  if (!original.has_groups()) throw DataError("DiDFieldBuilder: sample has no period labels");
  const double n_t = static_cast<double>(original.count_group(spec.period_t));
  const double n_s = static_cast<double>(original.count_group(spec.period_s));
  if (n_t == 0.0) throw DataError("DiDFieldBuilder: no rows in period t");
  if (n_s == 0.0) throw DataError("DiDFieldBuilder: no rows in period s");
  bool has_median = false;
  for (double t : grid.tau_axis())
    if (t == 0.5) has_median = true;
  if (!has_median) throw ConfigError("DiDFieldBuilder: tau grid must contain 0.5");

  const auto d = static_cast<int>(original.dim());
  const double at = n_t * int_pow(spec.h_t, d);
  const double as = n_s * int_pow(spec.h_s, d);
  r_n_ = {std::sqrt(at * as / (at + as))};
  eta_floor_scale_ = std::sqrt(int_pow(std::sqrt(spec.h_t * spec.h_s), d));
  n_tune_ = 0.5 * (n_t + n_s);

  std::vector<std::vector<double>> x_axes;
  std::vector<double> spacings;
  for (std::size_t m = 0; m < grid.dim(); ++m) {
    x_axes.push_back(grid.x_axis(m));
    spacings.push_back(grid.x_axis(m).size() > 1
                           ? grid.x_axis(m)[1] - grid.x_axis(m)[0]
                           : 1.0);
  }
  median_grid_ = EvalGrid(std::move(x_axes), {0.5}, std::move(spacings), 0.0);
}

RawFields DiDFieldBuilder::compute(const Sample& sample) const {
  const QuantileSurface qt = quantile_surface(sample, *grid_, spec_.h_t, spec_.poly_order,
                                              spec_.period_t, kernel_, spec_.mass_floor_obs);
  const QuantileSurface qs = quantile_surface(sample, *grid_, spec_.h_s, spec_.poly_order,
                                              spec_.period_s, kernel_, spec_.mass_floor_obs);
  const QuantileSurface mt = quantile_surface(sample, median_grid_, spec_.h_t, spec_.poly_order,
                                              spec_.period_t, kernel_, spec_.mass_floor_obs);
  const QuantileSurface ms = quantile_surface(sample, median_grid_, spec_.h_s, spec_.poly_order,
                                              spec_.period_s, kernel_, spec_.mass_floor_obs);

  const std::size_t g = grid_->size();
  const std::size_t n_tau = grid_->num_tau();
  RawFields out;
  out.v_hat.assign(1, std::vector<double>(g, 0.0));
  out.sigma_hat.assign(1, std::vector<double>(g, 1.0));
  out.usable.assign(g, 0);
  out.degenerate_fits =
      qt.degenerate_fits + qs.degenerate_fits + mt.degenerate_fits + ms.degenerate_fits;
  for (std::size_t p = 0; p < g; ++p) {
    const std::size_t px = p / n_tau;
    if (!qt.usable[p] || !qs.usable[p] || !mt.usable[px] || !ms.usable[px]) continue;
    out.usable[p] = 1;
    const double delta =
        (qt.q_hat[p] - qs.q_hat[p]) - (mt.q_hat[px] - ms.q_hat[px]);
    out.v_hat[0][p] = -delta;
  }
  return out;
}

// --- grid helpers ------------------------------------------------------------

EvalGrid make_mean_grid(double x_lo, double x_hi, std::size_t nx) {
  return EvalGrid::midpoint_x_only({{x_lo, x_hi, nx}}, 0.5);
}

EvalGrid make_auction_grid(const Sample& sample, std::size_t nx, std::size_t n_tau,
                           double tau_lo, double tau_hi, double x_quantile_trim) {
  if (sample.dim() != 1)
    throw ConfigError("make_auction_grid: built-in region selection requires d = 1");
  if (!(tau_lo > 0.0 && tau_hi < 1.0 && tau_lo < tau_hi))
    throw ConfigError("make_auction_grid: tau range must be strictly inside (0,1)");
  std::vector<double> xs = sample.covariate_column(0);
  const double lo = empirical_quantile(xs, x_quantile_trim);
  const double hi = empirical_quantile(xs, 1.0 - x_quantile_trim);
  if (!(hi > lo)) throw DataError("make_auction_grid: degenerate covariate range");
  return EvalGrid::midpoint({{lo, hi, nx}}, {tau_lo, tau_hi, n_tau});
}

EvalGrid make_did_grid(double x_lo, double x_hi, std::size_t nx, std::size_t n_tau,
                       double tau_lo, double tau_hi) {
  if (!(tau_lo > 0.0 && tau_hi < 1.0 && tau_lo < tau_hi))
    throw ConfigError("make_did_grid: tau range must be strictly inside (0,1)");
  EvalGrid grid = EvalGrid::midpoint({{x_lo, x_hi, nx}}, {tau_lo, tau_hi, n_tau});
  const auto& taus = grid.tau_axis();
  const double spacing = (tau_hi - tau_lo) / static_cast<double>(n_tau);
  std::size_t best = taus.size();
  double best_dist = 0.5 * spacing + 1e-12;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double dist = std::fabs(taus[i] - 0.5);
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  if (best == taus.size())
    throw ConfigError("make_did_grid: no tau node within half a cell of 0.5");
  grid.set_tau_node(best, 0.5);
  return grid;
}

Sample normalize_covariate_gauss_rank(const Sample& sample) {
  if (sample.dim() != 1)
    throw ConfigError("normalize_covariate_gauss_rank: requires d = 1");
  std::vector<double> xs = sample.covariate_column(0);
  const double m = sample_mean(xs);
  const double sd = sample_sd(xs);
  if (sd == 0.0) throw DataError("normalize_covariate_gauss_rank: degenerate covariate");
  Sample out(1, sample.has_groups());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double z = normal_cdf((sample.x(i)[0] - m) / sd);
    out.add_row(sample.y(i), std::span<const double>(&z, 1), sample.weight(i), sample.group(i));
  }
  return out;
}

}  // namespace fitest
