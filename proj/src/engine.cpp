#include "fitest/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fitest/common.hpp"
#include "fitest/numerics.hpp"
#include "fitest/parallel.hpp"

namespace fitest {

void TestSpec::validate() const {
  if (p < 1) throw ConfigError("TestSpec: p must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("TestSpec: alpha outside (0,1)");
  if (!(eta > 0.0)) throw ConfigError("TestSpec: eta must be > 0");
  if (n_boot < 1) throw ConfigError("TestSpec: n_boot must be >= 1");
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, RandomSource& rng) {
  std::vector<std::size_t> idx(n);
  for (auto& v : idx) v = static_cast<std::size_t>(rng.uniform_index(n));
  return idx;
}

Sample bootstrap_resample(const Sample& sample, RandomSource& rng) {
  const auto idx = bootstrap_indices(sample.size(), rng);
  return resample_rows(sample, idx);
}

double compute_theta_hat(const FieldStack& u_hat, const EvalGrid& grid, const TestSpec& spec) {
  const std::size_t g = grid.size();
  if (u_hat.usable.size() != g) throw NumericError("compute_theta_hat: shape mismatch");
  std::vector<double> v(u_hat.J);
  double sum = 0.0;
  bool any = false;
  for (std::size_t p = 0; p < g; ++p) {
    if (!u_hat.usable[p]) continue;
    any = true;
    for (std::size_t j = 0; j < u_hat.J; ++j) v[j] = u_hat.u[j][p];
    sum += lambda_p(v, spec.p, spec.form);
  }
  if (!any) throw NumericError("compute_theta_hat: usable region is empty");
  return sum * grid.cell_measure();
}

double sup_stat(const FieldStack& s_star, double n) {
  const double floor = std::sqrt(std::log(n));
  double m = floor;
  for (std::size_t j = 0; j < s_star.J; ++j)
    for (std::size_t p = 0; p < s_star.usable.size(); ++p)
      if (s_star.usable[p] && s_star.u[j][p] > m) m = s_star.u[j][p];
  return m;
}

double compute_c_hat_n(std::span<const double> sup_stats, double n, double c_cs) {
  if (!(n > std::exp(1.0))) throw NumericError("compute_c_hat_n: requires n > e");
  if (sup_stats.empty()) throw std::invalid_argument("compute_c_hat_n: no bootstrap draws");
  const double level = 1.0 - 0.1 / std::log(n);
  const double q = empirical_quantile({sup_stats.begin(), sup_stats.end()}, level);
  return c_cs * std::log(std::log(n)) * q;
}

double theta_star_contact(const FieldStack& s_star, const ContactSets& contact,
                          const EvalGrid& grid, const TestSpec& spec) {
  const std::size_t g = s_star.usable.size();
  if (contact.label.size() != g) throw NumericError("theta_star_contact: shape mismatch");
  std::vector<double> v(s_star.J);
  double sum = 0.0;
  for (std::size_t p = 0; p < g; ++p) {
    const std::uint32_t a = contact.label[p];
    if (a == 0 || !s_star.usable[p]) continue;
    for (std::size_t j = 0; j < s_star.J; ++j) v[j] = s_star.u[j][p];
    sum += lambda_A_p(v, a, spec.p, spec.form);
  }
  return sum * grid.cell_measure();
}

double theta_star_lfc(const FieldStack& s_star, const EvalGrid& grid, const TestSpec& spec) {
  std::vector<double> v(s_star.J);
  double sum = 0.0;
  for (std::size_t p = 0; p < s_star.usable.size(); ++p) {
    if (!s_star.usable[p]) continue;
    for (std::size_t j = 0; j < s_star.J; ++j) v[j] = s_star.u[j][p];
    sum += lambda_p(v, spec.p, spec.form);
  }
  return sum * grid.cell_measure();
}

CriticalValue critical_value(std::span<const double> theta_star_draws, double alpha, double eta,
                             double eta_floor_scale) {
  if (theta_star_draws.empty())
    throw std::invalid_argument("critical_value: no bootstrap draws");
  CriticalValue cv;
  double s = 0.0;
  for (double v : theta_star_draws) s += v;
  cv.a_star = s / static_cast<double>(theta_star_draws.size());
  cv.c_alpha =
      empirical_quantile({theta_star_draws.begin(), theta_star_draws.end()}, 1.0 - alpha);
  cv.c_alpha_eta = std::max(cv.c_alpha, eta_floor_scale * eta + cv.a_star);
  return cv;
}

PreparedTest prepare_test(const Sample& sample, const FieldBuilder& builder,
                          const EvalGrid& grid, const TestSpec& spec, const RandomSource& rng,
                          int workers) {
  spec.validate();
  sample.validate();
  PreparedTest prep;
  prep.grid_size = grid.size();
  prep.eta_floor_scale = builder.eta_floor_scale();
  prep.tuning_sample_size = builder.tuning_sample_size();

  const RawFields raw = builder.compute(sample);
  prep.degenerate_fits = raw.degenerate_fits;
  prep.u_hat = studentize(raw, builder.r_n());
  prep.theta_hat = compute_theta_hat(prep.u_hat, grid, spec);

  const std::size_t b_total = spec.n_boot;
  prep.s_star.resize(b_total);
  prep.sup_stats.assign(b_total, 0.0);
  std::vector<std::size_t> boot_degenerate(b_total, 0);
  parallel_for(b_total, workers, [&](std::size_t b) {
    RandomSource rb = rng.stream(b);
    const Sample res = bootstrap_resample(sample, rb);
    const RawFields raw_b = builder.compute(res);
    boot_degenerate[b] = raw_b.degenerate_fits;
    prep.s_star[b] = center_bootstrap(raw, raw_b, builder.r_n());
    prep.sup_stats[b] = sup_stat(prep.s_star[b], prep.tuning_sample_size);
  });
  for (std::size_t c : boot_degenerate) prep.boot_degenerate_fits += c;
  return prep;
}

TestResult finalize_test(const PreparedTest& prep, const EvalGrid& grid, const TestSpec& spec) {
  TestResult out;
  out.theta_hat = prep.theta_hat;
  out.summary.sup_stats = prep.sup_stats;

  const double c_hat_n = compute_c_hat_n(prep.sup_stats, prep.tuning_sample_size, spec.c_cs);
  out.contact = estimate_contact_sets(prep.u_hat, c_hat_n);

  const std::size_t b_total = prep.s_star.size();
  out.summary.theta_star.assign(b_total, 0.0);
  out.summary.theta_star_lfc.assign(b_total, 0.0);
  std::vector<double> v(prep.u_hat.J);
  for (std::size_t b = 0; b < b_total; ++b) {
    // Fused accumulation in flat grid order: the per-point censored term
    // never exceeds the uncensored one and floating-point addition is
    // monotone, so theta_star <= theta_star_lfc holds exactly per draw.
    const FieldStack& s = prep.s_star[b];
    double sum_contact = 0.0, sum_lfc = 0.0;
    for (std::size_t p = 0; p < s.usable.size(); ++p) {
      if (!s.usable[p]) continue;
      for (std::size_t j = 0; j < s.J; ++j) v[j] = s.u[j][p];
      sum_lfc += lambda_p(v, spec.p, spec.form);
      const std::uint32_t a = out.contact.label[p];
      if (a != 0) sum_contact += lambda_A_p(v, a, spec.p, spec.form);
    }
    out.summary.theta_star[b] = sum_contact * grid.cell_measure();
    out.summary.theta_star_lfc[b] = sum_lfc * grid.cell_measure();
  }

  const CriticalValue cv =
      critical_value(out.summary.theta_star, spec.alpha, spec.eta, prep.eta_floor_scale);
  out.summary.a_star = cv.a_star;
  out.summary.c_alpha_star = cv.c_alpha;
  out.summary.c_alpha_eta_star = cv.c_alpha_eta;
  const CriticalValue cv_lfc =
      critical_value(out.summary.theta_star_lfc, spec.alpha, spec.eta, prep.eta_floor_scale);
  out.summary.a_star_lfc = cv_lfc.a_star;
  out.summary.c_alpha_lfc = cv_lfc.c_alpha;
  out.summary.c_alpha_eta_lfc = cv_lfc.c_alpha_eta;

  out.reject = out.theta_hat > out.summary.c_alpha_eta_star;

  auto p_value = [&](std::span<const double> draws, const CriticalValue& c) {
    if (out.theta_hat <= prep.eta_floor_scale * spec.eta + c.a_star) return 1.0;
    std::size_t count = 0;
    for (double t : draws)
      if (t >= out.theta_hat) ++count;
    return static_cast<double>(count) / static_cast<double>(draws.size());
  };
  out.p_value = p_value(out.summary.theta_star, cv);
  out.diagnostics.p_value_lfc = p_value(out.summary.theta_star_lfc, cv_lfc);
  out.diagnostics.reject_lfc = out.theta_hat > out.summary.c_alpha_eta_lfc;

  out.diagnostics.grid_size = prep.grid_size;
  out.diagnostics.unusable_points = prep.grid_size;
  for (std::uint8_t u : prep.u_hat.usable)
    if (u) --out.diagnostics.unusable_points;
  out.diagnostics.degenerate_fits = prep.degenerate_fits;
  out.diagnostics.boot_degenerate_fits = prep.boot_degenerate_fits;
  out.diagnostics.eta_floor_scale = prep.eta_floor_scale;
  out.diagnostics.eta_floor = prep.eta_floor_scale * spec.eta + cv.a_star;
  out.diagnostics.tuning_sample_size = prep.tuning_sample_size;
  return out;
}

TestResult run_test(const Sample& sample, const FieldBuilder& builder, const EvalGrid& grid,
                    const TestSpec& spec, const RandomSource& rng, int workers) {
  const PreparedTest prep = prepare_test(sample, builder, grid, spec, rng, workers);
  return finalize_test(prep, grid, spec);
}

ExactBootstrap enumerate_bootstrap_exact(const Sample& sample, const FieldBuilder& builder,
                                         const EvalGrid& grid, const TestSpec& spec) {
  spec.validate();
  const std::size_t n = sample.size();
  if (n > 4) throw std::invalid_argument("enumerate_bootstrap_exact: n must be <= 4");
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= n;

  const RawFields raw = builder.compute(sample);
  const FieldStack u_hat = studentize(raw, builder.r_n());

  ExactBootstrap out;
  out.theta_hat = compute_theta_hat(u_hat, grid, spec);

  std::vector<FieldStack> stacks(total);
  std::vector<double> sups(total);
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t t = 0; t < total; ++t) {
    // decode odometer
    std::size_t rest = t;
    for (std::size_t i = 0; i < n; ++i) {
      idx[i] = rest % n;
      rest /= n;
    }
    const Sample res = resample_rows(sample, idx);
    const RawFields raw_b = builder.compute(res);
    stacks[t] = center_bootstrap(raw, raw_b, builder.r_n());
    sups[t] = sup_stat(stacks[t], builder.tuning_sample_size());
  }

  const double nn = builder.tuning_sample_size();
  if (!(nn > std::exp(1.0))) throw NumericError("enumerate_bootstrap_exact: requires n > e");
  const std::vector<double> weights(total, 1.0 / static_cast<double>(total));
  const double level = 1.0 - 0.1 / std::log(nn);
  out.c_hat_n = spec.c_cs * std::log(std::log(nn)) * weighted_quantile(sups, weights, level);

  const ContactSets contact = estimate_contact_sets(u_hat, out.c_hat_n);
  out.theta_star_atoms.resize(total);
  for (std::size_t t = 0; t < total; ++t)
    out.theta_star_atoms[t] = theta_star_contact(stacks[t], contact, grid, spec);

  double mean = 0.0;
  for (double v : out.theta_star_atoms) mean += v;
  mean /= static_cast<double>(total);
  double var = 0.0;
  for (double v : out.theta_star_atoms) var += (v - mean) * (v - mean);
  var /= static_cast<double>(total);
  out.a_star = mean;
  out.theta_star_var = var;
  out.c_alpha = weighted_quantile(out.theta_star_atoms, weights, 1.0 - spec.alpha);
  std::sort(out.theta_star_atoms.begin(), out.theta_star_atoms.end());
  return out;
}

}  // namespace fitest
