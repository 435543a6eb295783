#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fitest/contact.hpp"
#include "fitest/fields.hpp"
#include "fitest/grid.hpp"
#include "fitest/lambda.hpp"
#include "fitest/rng.hpp"
#include "fitest/sample.hpp"

namespace fitest {

struct TestSpec {
  int p = 1;
  LambdaForm form = LambdaForm::kSum;
  double alpha = 0.05;
  double eta = 1e-3;
  double c_cs = 0.5;
  std::size_t n_boot = 200;

  void validate() const;
};

struct BootstrapSummary {
  std::vector<double> theta_star;      // contact-set bootstrap statistic per draw
  std::vector<double> theta_star_lfc;  // least-favorable-configuration version
  std::vector<double> sup_stats;       // S*_n per draw
  double a_star = 0.0;
  double c_alpha_star = 0.0;
  double c_alpha_eta_star = 0.0;
  double a_star_lfc = 0.0;
  double c_alpha_lfc = 0.0;
  double c_alpha_eta_lfc = 0.0;
};

struct TestDiagnostics {
  std::size_t grid_size = 0;
  std::size_t unusable_points = 0;
  std::size_t degenerate_fits = 0;       // original-sample quantile fits with ties
  std::size_t boot_degenerate_fits = 0;  // summed over draws
  double eta_floor = 0.0;                // h^{d/2} eta + a*
  double eta_floor_scale = 0.0;          // the h^{d/2} factor
  double tuning_sample_size = 0.0;       // n entering the c_n rule
  bool reject_lfc = false;
  double p_value_lfc = 1.0;
};

struct TestResult {
  double theta_hat = 0.0;
  BootstrapSummary summary;
  ContactSets contact;
  bool reject = false;
  double p_value = 1.0;
  TestDiagnostics diagnostics;
};

// --- elementary operations -------------------------------------------------

std::vector<std::size_t> bootstrap_indices(std::size_t n, RandomSource& rng);
Sample bootstrap_resample(const Sample& sample, RandomSource& rng);

// theta = integral of Lambda_p(u) over the usable region.
double compute_theta_hat(const FieldStack& u_hat, const EvalGrid& grid, const TestSpec& spec);

// S*_n = max{ sup over usable points and j of s*, sqrt(log n) }.
double sup_stat(const FieldStack& s_star, double n);

// c_n = C_cs log(log n) q_{1 - 0.1/log n}(S*_n). Requires n > e.
double compute_c_hat_n(std::span<const double> sup_stats, double n, double c_cs);

double theta_star_contact(const FieldStack& s_star, const ContactSets& contact,
                          const EvalGrid& grid, const TestSpec& spec);
double theta_star_lfc(const FieldStack& s_star, const EvalGrid& grid, const TestSpec& spec);

struct CriticalValue {
  double c_alpha = 0.0;
  double a_star = 0.0;
  double c_alpha_eta = 0.0;  // max{c_alpha, eta_floor_scale * eta + a_star}
};
CriticalValue critical_value(std::span<const double> theta_star_draws, double alpha, double eta,
                             double eta_floor_scale);

// --- full procedure ---------------------------------------------------------

// Everything that does not depend on (c_cs, alpha, eta): the studentized
// fields, theta, and one bootstrap pass holding the centered stacks and
// their sup statistics. A single pass feeds both the c_n rule and the
// bootstrap distribution; draws are keyed by replication index so results
// are independent of the worker count.
struct PreparedTest {
  FieldStack u_hat;
  double theta_hat = 0.0;
  std::vector<FieldStack> s_star;
  std::vector<double> sup_stats;
  double eta_floor_scale = 0.0;
  double tuning_sample_size = 0.0;
  std::size_t grid_size = 0;
  std::size_t degenerate_fits = 0;
  std::size_t boot_degenerate_fits = 0;
};

PreparedTest prepare_test(const Sample& sample, const FieldBuilder& builder,
                          const EvalGrid& grid, const TestSpec& spec, const RandomSource& rng,
                          int workers = 1);

TestResult finalize_test(const PreparedTest& prep, const EvalGrid& grid, const TestSpec& spec);

TestResult run_test(const Sample& sample, const FieldBuilder& builder, const EvalGrid& grid,
                    const TestSpec& spec, const RandomSource& rng, int workers = 1);

// --- exact small-n oracle ----------------------------------------------------

// Full enumeration of all n^n equiprobable resamples (n <= 4) replacing the
// Monte Carlo bootstrap; validates the sampled pipeline.
struct ExactBootstrap {
  double theta_hat = 0.0;
  double c_hat_n = 0.0;
  double a_star = 0.0;
  double c_alpha = 0.0;
  double theta_star_var = 0.0;
  std::vector<double> theta_star_atoms;  // sorted, one per resample
};

ExactBootstrap enumerate_bootstrap_exact(const Sample& sample, const FieldBuilder& builder,
                                         const EvalGrid& grid, const TestSpec& spec);

}  // namespace fitest
