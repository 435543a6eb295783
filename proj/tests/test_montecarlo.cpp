#include <doctest.h>

#include <cmath>
#include <vector>

#include "fitest/montecarlo.hpp"
#include "fitest/numerics.hpp"
#include "fitest/rng.hpp"

using namespace fitest;

TEST_CASE("plateau shapes") {
  CHECK(f_as(DgpShape::kAS1, 1.0, 0.0) == doctest::Approx(0.3989423).epsilon(1e-7));
  CHECK(f_as(DgpShape::kAS1, 5.0, 0.0) == doctest::Approx(1.9947114).epsilon(1e-7));
  CHECK(f_as(DgpShape::kAS2, 1.0, 1.5) == doctest::Approx(0.3989423).epsilon(1e-7));
  CHECK(f_as(DgpShape::kAS2, 1.0, -1.5) == doctest::Approx(0.3989423).epsilon(1e-7));
  // far from the plateaus the shapes vanish
  CHECK(f_as(DgpShape::kAS1, 1.0, 1.8) < 1e-10);
  CHECK(f_as(DgpShape::kAS2, 1.0, 0.0) < 1e-10);
}

TEST_CASE("null thetas") {
  DgpSpec d1{DgpShape::kAS1, 1.0, 0.1, 100};
  CHECK(null_theta(d1, ThetaMode::kCp) == doctest::Approx(0.3989423).epsilon(1e-7));
  CHECK(null_theta(d1, ThetaMode::kFcp) == doctest::Approx(0.3789423).epsilon(1e-7));
  DgpSpec d4{DgpShape::kAS2, 5.0, 0.1, 100};
  CHECK(null_theta(d4, ThetaMode::kCp) == doctest::Approx(1.9947114).epsilon(1e-7));
}

TEST_CASE("dgp sampling: support and truncation") {
  DgpSpec spec{DgpShape::kAS1, 1.0, 3.0, 4000};  // large sigma forces truncation to bind
  RandomSource rng(5);
  const Sample s = sample_dgp(spec, rng);
  std::size_t truncated = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = s.x(i)[0];
    CHECK(x >= -2.0);
    CHECK(x <= 2.0);
    const double u = s.y_scalar(i) - f_as(spec.shape, spec.L, x);
    CHECK(u >= -3.0 - 1e-12);
    CHECK(u <= 3.0 + 1e-12);
    if (u == 3.0 || u == -3.0) ++truncated;
  }
  CHECK(truncated > 0);  // P(|3 Z| > 3) = 32%, so clamping must occur
}

TEST_CASE("dgp sampling: noise is centered (law of large numbers)") {
  DgpSpec spec{DgpShape::kAS1, 1.0, 1.0, 1000000};
  RandomSource rng(6);
  const Sample s = sample_dgp(spec, rng);
  double sum = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double u = s.y_scalar(i) - f_as(spec.shape, spec.L, s.x(i)[0]);
    sum += u;
    ss += u * u;
  }
  const double mean = sum / static_cast<double>(s.size());
  const double sd = std::sqrt(ss / static_cast<double>(s.size()));
  CHECK(std::fabs(mean) <= 4.0 * sd / 1000.0);
}

TEST_CASE("experiment: single replication is reproducible") {
  ExperimentConfig ec;
  ec.dgp = dgp_by_number(1);
  ec.dgp.n = 60;
  ec.n_mc = 1;
  ec.n_boot = 40;
  ec.nx = 21;
  ec.c_cs = {0.5};
  ec.master_seed = 99;
  const ExperimentReport r1 = run_experiment(ec);
  const ExperimentReport r2 = run_experiment(ec);
  CHECK(r1.cells[0].coverage == r2.cells[0].coverage);
  CHECK((r1.cells[0].coverage == 0.0 || r1.cells[0].coverage == 1.0));
  CHECK(r1.reject == r2.reject);
}

TEST_CASE("experiment: deeply slack design never rejects") {
  // f == -10 via a custom spec: emulate by testing theta = 0 against AS1
  // shifted far below zero. Covered at scale by the acceptance suite;
  // here a quick 10-replication version.
  ExperimentConfig ec;
  ec.dgp = DgpSpec{DgpShape::kAS1, 1.0, 1.0, 80};
  ec.n_mc = 10;
  ec.n_boot = 60;
  ec.nx = 21;
  ec.c_cs = {0.5};
  ec.master_seed = 12;
  ec.theta_mode = ThetaMode::kCp;
  // theta = max f: boundary null; rejections should be rare but possible.
  const ExperimentReport rep = run_experiment(ec, 2);
  CHECK(rep.cells[0].coverage >= 0.5);
  // mc standard error formula
  const auto& c = rep.cells[0];
  CHECK(c.mc_se ==
        doctest::Approx(std::sqrt(c.coverage * (1.0 - c.coverage) / double(c.n_mc))));
}

TEST_CASE("experiment: coverage monotone in c_cs replication by replication") {
  ExperimentConfig ec;
  ec.dgp = dgp_by_number(3);
  ec.dgp.n = 80;
  ec.n_mc = 25;
  ec.n_boot = 60;
  ec.nx = 31;
  ec.c_cs = {0.4, 0.5, 0.6};
  ec.master_seed = 31;
  ec.theta_mode = ThetaMode::kFcp;  // rejections actually occur here
  const ExperimentReport rep = run_experiment(ec, 2);
  for (std::size_t r = 0; r < ec.n_mc; ++r) {
    CHECK(rep.reject[0][r] >= rep.reject[1][r]);
    CHECK(rep.reject[1][r] >= rep.reject[2][r]);
  }
  CHECK(rep.cells[0].coverage <= rep.cells[1].coverage);
  CHECK(rep.cells[1].coverage <= rep.cells[2].coverage);
}

TEST_CASE("experiment: cp rejections nest inside fcp rejections on shared seeds") {
  ExperimentConfig cp;
  cp.dgp = dgp_by_number(1);
  cp.dgp.n = 70;
  cp.n_mc = 30;
  cp.n_boot = 60;
  cp.nx = 31;
  cp.c_cs = {0.5};
  cp.master_seed = 44;
  ExperimentConfig fcp = cp;
  fcp.theta_mode = ThetaMode::kFcp;
  const ExperimentReport rc = run_experiment(cp, 2);
  const ExperimentReport rf = run_experiment(fcp, 2);
  for (std::size_t r = 0; r < cp.n_mc; ++r)
    if (rc.reject[0][r]) CHECK(rf.reject[0][r]);
}

TEST_CASE("experiment: report independent of worker count") {
  ExperimentConfig ec;
  ec.dgp = dgp_by_number(2);
  ec.dgp.n = 50;
  ec.n_mc = 12;
  ec.n_boot = 30;
  ec.nx = 21;
  ec.master_seed = 77;
  const ExperimentReport r1 = run_experiment(ec, 1);
  const ExperimentReport r4 = run_experiment(ec, 4);
  CHECK(r1.reject == r4.reject);
}
