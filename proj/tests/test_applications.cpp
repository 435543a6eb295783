#include <doctest.h>

#include <cmath>
#include <vector>

#include "fitest/applications.hpp"
#include "fitest/common.hpp"
#include "fitest/engine.hpp"
#include "fitest/numerics.hpp"
#include "fitest/rng.hpp"
#include "helpers.hpp"

using namespace fitest;

namespace {

// Two bidder groups with known conditional bid quantiles: group-2 bids on
// the line a2 + b2 x + spread*tau, group-3 likewise. Uniform bid noise makes
// the tau-quantile linear in tau.
Sample auction_sample(RandomSource& rng, std::size_t n_auctions, double a2, double a3,
                      double slope, double spread) {
  Sample s(1, true);
  for (std::size_t i = 0; i < n_auctions; ++i) {
    const double x = rng.uniform(0.0, 1.0);
    const long k = (i % 2 == 0) ? 2 : 3;
    std::vector<double> bids(static_cast<std::size_t>(k));
    const double base = (k == 2 ? a2 : a3) + slope * x;
    for (auto& bv : bids) bv = base + spread * rng.uniform01();
    s.add_row(bids, std::span<const double>(&x, 1), 1.0, k);
  }
  return s;
}

}  // namespace

TEST_CASE("mean builder: constant outcome at the null gives zero field") {
  RandomSource rng(61);
  Sample s(1);
  for (int i = 0; i < 20; ++i) {
    const double x = rng.uniform(-0.5, 0.5);
    s.add_row(1.7, std::span<const double>(&x, 1));
  }
  const EvalGrid grid = EvalGrid::midpoint_x_only({{-0.4, 0.4, 7}}, 0.5);
  const MeanFieldBuilder b(s, {1.7, 1.0}, grid, 0.8);
  const RawFields raw = b.compute(s);
  const FieldStack u = studentize(raw, b.r_n());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (u.usable[p]) CHECK(u.u[0][p] == 0.0);
  }
}

TEST_CASE("mean builder: larger theta lowers v pointwise") {
  RandomSource rng(62);
  const Sample s = testutil::random_mean_sample(rng, 30, -0.5, 0.5);
  const EvalGrid grid = EvalGrid::midpoint_x_only({{-0.4, 0.4, 7}}, 0.5);
  const MeanFieldBuilder b0(s, {0.0, 1.0}, grid, 0.8);
  const MeanFieldBuilder b1(s, {0.25, 1.0}, grid, 0.8);
  const RawFields r0 = b0.compute(s), r1 = b1.compute(s);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (!r0.usable[p]) continue;
    CHECK(r1.v_hat[0][p] < r0.v_hat[0][p]);
  }
}

TEST_CASE("mean builder: hand-computed n=2 fields") {
  Sample s(1);
  {
    const double x0 = 0.0, x1 = 0.2;
    s.add_row(1.0, std::span<const double>(&x0, 1));
    s.add_row(-2.0, std::span<const double>(&x1, 1));
  }
  const EvalGrid grid = EvalGrid::midpoint_x_only({{-0.5, 0.5, 1}}, 0.5);  // x = 0
  const double h = 1.0;
  const MeanFieldBuilder b(s, {0.0, 0.0}, grid, h);
  const RawFields raw = b.compute(s);
  KernelSpec kern;
  const double k0 = kernel_eval(kern, 0.0), k1 = kernel_eval(kern, 0.2);
  const double v = (1.0 * k0 - 2.0 * k1) / 2.0;
  const double sig = std::sqrt((1.0 * k0 * k0 + 4.0 * k1 * k1) / 2.0);
  CHECK(raw.v_hat[0][0] == doctest::Approx(v).epsilon(1e-14));
  CHECK(raw.sigma_hat[0][0] == doctest::Approx(sig).epsilon(1e-14));
  const FieldStack u = studentize(raw, b.r_n());
  CHECK(u.u[0][0] == doctest::Approx(std::sqrt(2.0 * h) * v / sig).epsilon(1e-14));
}

TEST_CASE("auction builder: point formulas with supplied lower endpoint") {
  RandomSource rng(63);
  // degenerate spreads so quantiles are flat: q2 = 5, q3 = 7 at every (tau, x)
  Sample s = auction_sample(rng, 40, 5.0, 7.0, 0.0, 0.0);
  const EvalGrid grid = EvalGrid::midpoint({{0.2, 0.8, 3}}, {0.2, 0.8, 3});
  AuctionSpec spec;
  spec.b_lower_mode = BLowerMode::kSupplied;
  spec.b_lower_supplied = 1.0;
  spec.mass_floor_obs = 1.0;
  const AuctionFieldBuilder b(s, spec, grid, 2.0);
  const RawFields raw = b.compute(s);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    REQUIRE(raw.usable[p] == 1);
    CHECK(raw.v_hat[0][p] == doctest::Approx(-2.0).epsilon(1e-12));          // 5 - 7
    CHECK(raw.v_hat[1][p] == doctest::Approx(1.0 - 10.0 + 7.0).epsilon(1e-12));
    CHECK(raw.sigma_hat[0][p] == 1.0);
    CHECK(raw.sigma_hat[1][p] == 1.0);
  }
  // r_n = sqrt(n h) and the eta floor scale is sqrt(h)
  CHECK(b.r_n()[0] == doctest::Approx(std::sqrt(40.0 * 2.0)));
  CHECK(b.eta_floor_scale() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("auction builder: sample minimum lower endpoint") {
  Sample s(1, true);
  const double x = 0.5;
  s.add_row(std::vector<double>{3.0, 1.0}, std::span<const double>(&x, 1), 1.0, 2);
  s.add_row(std::vector<double>{2.0, 5.0, 4.0}, std::span<const double>(&x, 1), 1.0, 3);
  CHECK(s.min_outcome() == 1.0);
}

TEST_CASE("auction builder: swapping the group labels negates v1") {
  RandomSource rng(64);
  Sample s = auction_sample(rng, 60, 1.0, 1.4, 0.5, 0.3);
  Sample swapped(1, true);
  for (std::size_t i = 0; i < s.size(); ++i)
    swapped.add_row(s.y(i), s.x(i), s.weight(i), s.group(i) == 2 ? 3 : 2);
  const EvalGrid grid = EvalGrid::midpoint({{0.3, 0.7, 3}}, {0.3, 0.7, 3});
  AuctionSpec spec;
  spec.mass_floor_obs = 1.0;
  const AuctionFieldBuilder b1(s, spec, grid, 1.5);
  const AuctionFieldBuilder b2(swapped, spec, grid, 1.5);
  const RawFields f1 = b1.compute(s), f2 = b2.compute(swapped);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (!f1.usable[p] || !f2.usable[p]) continue;
    CHECK(f2.v_hat[0][p] == -f1.v_hat[0][p]);  // exact: identical fits, swapped roles
  }
}

TEST_CASE("auction builder: adding a constant to all bids leaves v unchanged") {
  RandomSource rng(65);
  Sample s = auction_sample(rng, 60, 1.0, 1.4, 0.5, 0.3);
  const double c = 2.75;
  Sample shifted(1, true);
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::vector<double> bids(s.y(i).begin(), s.y(i).end());
    for (auto& bv : bids) bv += c;
    shifted.add_row(bids, s.x(i), s.weight(i), s.group(i));
  }
  const EvalGrid grid = EvalGrid::midpoint({{0.3, 0.7, 3}}, {0.3, 0.7, 3});
  AuctionSpec spec;
  spec.mass_floor_obs = 1.0;
  const AuctionFieldBuilder b1(s, spec, grid, 1.5);
  const AuctionFieldBuilder b2(shifted, spec, grid, 1.5);
  const RawFields f1 = b1.compute(s), f2 = b2.compute(shifted);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (!f1.usable[p] || !f2.usable[p]) continue;
    CHECK(f2.v_hat[0][p] == doctest::Approx(f1.v_hat[0][p]).epsilon(1e-9));
    CHECK(f2.v_hat[1][p] == doctest::Approx(f1.v_hat[1][p]).epsilon(1e-9));
  }
}

TEST_CASE("auction builder: missing group errors") {
  RandomSource rng(66);
  Sample s(1, true);
  for (int i = 0; i < 10; ++i) {
    const double x = rng.uniform01();
    s.add_row(std::vector<double>{1.0, 2.0}, std::span<const double>(&x, 1), 1.0, 2);
  }
  const EvalGrid grid = EvalGrid::midpoint({{0.2, 0.8, 3}}, {0.3, 0.7, 3});
  CHECK_THROWS_AS(AuctionFieldBuilder(s, {}, grid, 1.0), DataError);
}

TEST_CASE("did builder: median row is exactly zero and r_n matches") {
  RandomSource rng(67);
  Sample s(1, true);
  for (int i = 0; i < 160; ++i) {
    const double x = rng.uniform(0.0, 1.0);
    const long period = (i % 2 == 0) ? 1974 : 1988;
    const double y = (period == 1988 ? 0.5 + 0.3 * x : 0.2 * x) + rng.normal();
    s.add_row(y, std::span<const double>(&x, 1), rng.uniform(0.5, 1.5), period);
  }
  const EvalGrid grid = make_did_grid(0.2, 0.8, 5, 9, 0.1, 0.9);
  // tau axis must contain exactly 0.5
  bool has_half = false;
  for (double t : grid.tau_axis()) has_half = has_half || t == 0.5;
  REQUIRE(has_half);
  DiDSpec spec;
  spec.period_t = 1988;
  spec.period_s = 1974;
  spec.h_t = 0.8;
  spec.h_s = 0.8;
  spec.mass_floor_obs = 1.0;
  const DiDFieldBuilder b(s, spec, grid);
  const RawFields raw = b.compute(s);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (grid.tau_at(p) == 0.5 && raw.usable[p]) CHECK(raw.v_hat[0][p] == 0.0);
  }
  // r_n with n_t h_t = 80 * 0.8 = 64 = n_s h_s: sqrt(64*64/128) = sqrt(32)
  CHECK(b.r_n()[0] == doctest::Approx(std::sqrt(32.0)));
  CHECK(b.tuning_sample_size() == doctest::Approx(80.0));

  DiDSpec missing = spec;
  missing.period_s = 1900;
  CHECK_THROWS_AS(DiDFieldBuilder(s, missing, grid), DataError);
}

TEST_CASE("did r_n formula reflects unequal sample sizes") {
  // n_t h_t = 100, n_s h_s = 300 -> r_n = sqrt(75)
  RandomSource rng(68);
  Sample s(1, true);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform01();
    s.add_row(rng.normal(), std::span<const double>(&x, 1), 1.0, 1);
  }
  for (int i = 0; i < 300; ++i) {
    const double x = rng.uniform01();
    s.add_row(rng.normal(), std::span<const double>(&x, 1), 1.0, 2);
  }
  const EvalGrid grid = make_did_grid(0.2, 0.8, 5, 9, 0.1, 0.9);
  DiDSpec spec;
  spec.period_t = 1;
  spec.period_s = 2;
  spec.h_t = 1.0;
  spec.h_s = 1.0;
  const DiDFieldBuilder b(s, spec, grid);
  CHECK(b.r_n()[0] == doctest::Approx(std::sqrt(75.0)).epsilon(1e-12));
  CHECK(b.r_n()[0] == doctest::Approx(8.6603).epsilon(1e-4));
  // eta floor uses the geometric mean bandwidth
  CHECK(b.eta_floor_scale() == doctest::Approx(1.0));
}

TEST_CASE("did builder requires the median in the tau grid") {
  RandomSource rng(69);
  Sample s(1, true);
  for (int i = 0; i < 40; ++i) {
    const double x = rng.uniform01();
    s.add_row(rng.normal(), std::span<const double>(&x, 1), 1.0, i % 2);
  }
  const EvalGrid bad = EvalGrid::midpoint({{0.2, 0.8, 3}}, {0.6, 0.9, 4});
  DiDSpec spec;
  spec.period_t = 1;
  spec.period_s = 0;
  spec.h_t = 1.0;
  spec.h_s = 1.0;
  CHECK_THROWS_AS(DiDFieldBuilder(s, spec, bad), ConfigError);
}

TEST_CASE("auction grid uses covariate percentiles; gauss-rank maps into (0,1)") {
  RandomSource rng(70);
  Sample s(1, true);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.normal() * 10.0 + 50.0;
    s.add_row(std::vector<double>{1.0, 2.0}, std::span<const double>(&x, 1), 1.0,
              i % 2 ? 2 : 3);
  }
  const EvalGrid grid = make_auction_grid(s, 11, 5, 0.1, 0.9, 0.1);
  auto xs = s.covariate_column(0);
  const double lo = empirical_quantile(xs, 0.1), hi = empirical_quantile(xs, 0.9);
  CHECK(grid.x_axis(0).front() > lo);
  CHECK(grid.x_axis(0).back() < hi);
  CHECK(grid.num_tau() == 5);

  const Sample t = normalize_covariate_gauss_rank(s);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t.x(i)[0] > 0.0);
    CHECK(t.x(i)[0] < 1.0);
  }
}
