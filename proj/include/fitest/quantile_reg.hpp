#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fitest/grid.hpp"
#include "fitest/kernel.hpp"
#include "fitest/sample.hpp"

namespace fitest {

// l_tau(u) = {|u| + (2 tau - 1) u} / 2 = tau u^+ + (1 - tau) u^-.
double check_loss(double u, double tau);

std::size_t polynomial_basis_size(std::size_t d, int r);

// All monomials z^u with total degree [u] <= r, graded lexicographic order,
// constant term first: d=2, r=2 gives (1, z1, z2, z1^2, z1 z2, z2^2).
void polynomial_basis(std::span<const double> z, int r, std::span<double> out);
std::vector<double> polynomial_basis(std::span<const double> z, int r);

struct QuantileFit {
  std::vector<double> gamma;
  double q_hat = 0.0;      // first coefficient
  double objective = 0.0;  // achieved weighted check-loss sum
  bool degenerate = false; // optimal vertex not unique
  std::size_t iterations = 0;
};

// Exact minimizer of sum_i w_i l_tau(y_i - gamma.c_i) over gamma, computed
// as the quantile-regression linear program by simplex pivoting on basic
// solutions (k rows with zero residual). Ties among optimal bases are
// broken toward the lexicographically smallest gamma reachable along
// zero-cost edges; such fits are flagged degenerate.
//
// design is m x k row-major. Throws NumericError when the active design has
// rank < k or the program is unbounded.
class QuantileLpSolver {
 public:
  QuantileFit solve(std::span<const double> design, std::size_t m, std::size_t k,
                    std::span<const double> y, std::span<const double> w, double tau);

 private:
  // reusable workspace
  std::vector<double> lu_, rhs_, gamma_, resid_, gvec_, work_;
  std::vector<std::size_t> basis_, perm_, order_;
};

// Local polynomial quantile regression at a single point: weighted check
// loss over rows with positive kernel weight (optionally restricted to one
// group), weights = observation weight x kernel weight, basis c((X_i-x)/h).
QuantileFit local_poly_quantile(const Sample& sample, std::span<const double> x, double tau,
                                double h, int r, std::optional<long> group,
                                const KernelSpec& kernel = {});

struct QuantileSurface {
  std::vector<double> q_hat;           // grid-indexed
  std::vector<std::uint8_t> usable;
  std::vector<double> effective_mass;  // per grid point, outcome-row kernel mass
  std::size_t degenerate_fits = 0;
  std::size_t failed_fits = 0;
};

// local_poly_quantile evaluated at every (x, tau) grid node. Per-point
// failures (too few active rows, collinear design) are flagged unusable;
// throws NumericError only when no grid point is usable.
QuantileSurface quantile_surface(const Sample& sample, const EvalGrid& grid, double h, int r,
                                 std::optional<long> group, const KernelSpec& kernel = {},
                                 double mass_floor_obs = 5.0);

}  // namespace fitest
