#pragma once

#include <cstdint>
#include <vector>

#include "fitest/engine.hpp"
#include "fitest/sample.hpp"

namespace fitest {

enum class DgpShape { kAS1, kAS2 };

// Y = f(X) + U with X ~ Unif[-2,2] and U a truncated normal,
// U = min{max{-3, sigma * Z}, 3}, Z ~ N(0,1).
struct DgpSpec {
  DgpShape shape = DgpShape::kAS1;
  double L = 1.0;
  double sigma = 1.0;
  std::size_t n = 100;
};

// 1..4 -> (AS1, L=1), (AS1, L=5), (AS2, L=1), (AS2, L=5).
DgpSpec dgp_by_number(int k);

// f_AS1(x) = L phi(x^10); f_AS2(x) = L max{phi((x-1.5)^10), phi((x+1.5)^10)}.
double f_as(DgpShape shape, double L, double x);

Sample sample_dgp(const DgpSpec& spec, RandomSource& rng);

enum class ThetaMode { kCp, kFcp };

// theta = max_{x in [x_lo, x_hi]} f(x), minus 0.02 in FCP mode.
double null_theta(const DgpSpec& spec, ThetaMode mode, double x_lo = -1.8, double x_hi = 1.8);

struct ExperimentConfig {
  DgpSpec dgp;
  std::size_t n_mc = 1000;
  std::size_t n_boot = 200;
  std::vector<double> c_cs = {0.4, 0.5, 0.6};
  double alpha = 0.05;
  ThetaMode theta_mode = ThetaMode::kCp;
  std::uint64_t master_seed = 0;
  std::size_t nx = 101;
  double x_lo = -1.8;
  double x_hi = 1.8;
  double bandwidth_factor = 2.0;
  double bandwidth_exponent = -0.2;
  int p = 1;
  LambdaForm form = LambdaForm::kSum;
  double eta = 1e-3;
  double mass_floor_obs = 5.0;
};

struct ExperimentReport {
  struct Cell {
    double c_cs = 0.0;
    std::size_t n_mc = 0;
    std::size_t rejections = 0;
    double coverage = 0.0;  // non-rejection frequency
    double mc_se = 0.0;     // sqrt(coverage (1-coverage) / n_mc)
  };
  std::vector<Cell> cells;                       // one per c_cs, input order
  std::vector<std::vector<std::uint8_t>> reject; // [c_cs][replication]
  double theta = 0.0;
  double wall_seconds = 0.0;
};

// One CP/FCP experiment. Replication r draws its sample from stream (r, 0)
// and its bootstrap pass from stream (r, 1) of the master seed; all c_cs
// values share the replication's draws, so coverage is monotone in c_cs
// replication by replication. Reports are identical for any worker count.
ExperimentReport run_experiment(const ExperimentConfig& config, int workers = 1);

}  // namespace fitest
