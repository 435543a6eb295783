#include "fitest/quantile_reg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fitest/common.hpp"
#include "fitest/numerics.hpp"

namespace fitest {

double check_loss(double u, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("check_loss: tau outside (0,1)");
  return u >= 0.0 ? tau * u : (tau - 1.0) * u;
}

std::size_t polynomial_basis_size(std::size_t d, int r) {
  // C(d + r, d)
  std::size_t num = 1, den = 1;
  for (std::size_t i = 1; i <= d; ++i) {
    num *= static_cast<std::size_t>(r) + i;
    den *= i;
  }
  return num / den;
}

void polynomial_basis(std::span<const double> z, int r, std::span<double> out) {
  if (r < 0) throw std::invalid_argument("polynomial_basis: r must be >= 0");
  const std::size_t d = z.size();
  const std::size_t k = polynomial_basis_size(d, r);
  if (out.size() != k) throw std::invalid_argument("polynomial_basis: bad output size");
  // Graded lexicographic: loop total degree g = 0..r, exponents of z1
  // descending within each degree.
  std::size_t pos = 0;
  std::vector<int> expo(d, 0);
  // iterative enumeration of compositions of g into d parts, lex descending
  for (int g = 0; g <= r; ++g) {
    std::fill(expo.begin(), expo.end(), 0);
    expo[0] = g;
    while (true) {
      double v = 1.0;
      for (std::size_t m = 0; m < d; ++m)
        for (int e = 0; e < expo[m]; ++e) v *= z[m];
      out[pos++] = v;
      // next composition in lex-descending order
      if (d == 1) break;
      // find rightmost index < d-1 with positive entry to decrement
      std::size_t i = d - 1;
      int tail = expo[d - 1];
      bool advanced = false;
      while (i-- > 0) {
        if (expo[i] > 0) {
          --expo[i];
          for (std::size_t j = i + 1; j < d; ++j) expo[j] = 0;
          expo[i + 1] = tail + 1;
          advanced = true;
          break;
        }
        tail += expo[i];
      }
      if (!advanced) break;
    }
  }
}

std::vector<double> polynomial_basis(std::span<const double> z, int r) {
  std::vector<double> out(polynomial_basis_size(z.size(), r));
  polynomial_basis(z, r, out);
  return out;
}

namespace {

constexpr double kRankTol = 1e-10;

// LU with partial pivoting on a k x k matrix stored row-major in `lu`;
// returns false if singular. perm holds the row permutation.
bool lu_factor(std::vector<double>& lu, std::vector<std::size_t>& perm, std::size_t k) {
  perm.resize(k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    double best = std::fabs(lu[c * k + c]);
    for (std::size_t r2 = c + 1; r2 < k; ++r2) {
      const double m = std::fabs(lu[r2 * k + c]);
      if (m > best) {
        best = m;
        piv = r2;
      }
    }
    if (!(best > 0.0)) return false;
    if (piv != c) {
      for (std::size_t j = 0; j < k; ++j) std::swap(lu[c * k + j], lu[piv * k + j]);
      std::swap(perm[c], perm[piv]);
    }
    const double dinv = 1.0 / lu[c * k + c];
    for (std::size_t r2 = c + 1; r2 < k; ++r2) {
      const double f = lu[r2 * k + c] * dinv;
      lu[r2 * k + c] = f;
      for (std::size_t j = c + 1; j < k; ++j) lu[r2 * k + j] -= f * lu[c * k + j];
    }
  }
  return true;
}

void lu_solve(const std::vector<double>& lu, const std::vector<std::size_t>& perm, std::size_t k,
              const double* b, double* x) {
  for (std::size_t i = 0; i < k; ++i) {
    double s = b[perm[i]];
    for (std::size_t j = 0; j < i; ++j) s -= lu[i * k + j] * x[j];
    x[i] = s;
  }
  for (std::size_t i = k; i-- > 0;) {
    double s = x[i];
    for (std::size_t j = i + 1; j < k; ++j) s -= lu[i * k + j] * x[j];
    x[i] = s / lu[i * k + i];
  }
}

struct Edge {
  std::size_t slot;  // basis slot l
  int sign;          // residual direction at the leaving row
  double deriv;      // one-sided objective derivative
};

}  // namespace

QuantileFit QuantileLpSolver::solve(std::span<const double> design, std::size_t m, std::size_t k,
                                    std::span<const double> y, std::span<const double> w,
                                    double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("QuantileLpSolver: tau outside (0,1)");
  if (k == 0 || m < k) throw NumericError("QuantileLpSolver: fewer active rows than basis size");

  double y_scale = 1.0, w_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    y_scale = std::max(y_scale, std::fabs(y[i]));
    w_sum += w[i];
  }
  const double tol_res = 1e-11 * y_scale;
  const double tol_opt = 1e-10 * std::max(1.0, w_sum);
  const double tol_tie = 1e-7 * std::max(1.0, w_sum);

  // --- initial basis: k independent rows by greedy elimination ---
  basis_.clear();
  work_.assign(design.begin(), design.end());
  std::vector<std::uint8_t> taken(m, 0);
  double mat_scale = 0.0;
  for (double v : work_) mat_scale = std::max(mat_scale, std::fabs(v));
  if (mat_scale == 0.0) throw NumericError("QuantileLpSolver: zero design");
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t best_row = m;
    double best = kRankTol * mat_scale;
    for (std::size_t i = 0; i < m; ++i) {
      if (taken[i]) continue;
      const double v = std::fabs(work_[i * k + c]);
      if (v > best) {
        best = v;
        best_row = i;
      }
    }
    if (best_row == m) throw NumericError("QuantileLpSolver: collinear local design");
    taken[best_row] = 1;
    basis_.push_back(best_row);
    const double piv = work_[best_row * k + c];
    for (std::size_t i = 0; i < m; ++i) {
      if (taken[i]) continue;
      const double f = work_[i * k + c] / piv;
      if (f == 0.0) continue;
      for (std::size_t j = c; j < k; ++j) work_[i * k + j] -= f * work_[best_row * k + j];
    }
  }

  gamma_.assign(k, 0.0);
  resid_.assign(m, 0.0);
  gvec_.assign(m, 0.0);
  rhs_.assign(k, 0.0);

  auto refresh = [&]() {
    lu_.assign(k * k, 0.0);
    for (std::size_t l = 0; l < k; ++l)
      for (std::size_t j = 0; j < k; ++j) lu_[l * k + j] = design[basis_[l] * k + j];
    if (!lu_factor(lu_, perm_, k)) throw NumericError("QuantileLpSolver: singular basis");
    for (std::size_t l = 0; l < k; ++l) rhs_[l] = y[basis_[l]];
    lu_solve(lu_, perm_, k, rhs_.data(), gamma_.data());
    for (std::size_t i = 0; i < m; ++i) {
      double s = y[i];
      for (std::size_t j = 0; j < k; ++j) s -= design[i * k + j] * gamma_[j];
      resid_[i] = s;
    }
    for (std::size_t l = 0; l < k; ++l) resid_[basis_[l]] = 0.0;
  };

  // gvec_[i] = c_i . (C_B^{-1} e_slot); residual rate along the (slot, sign)
  // edge is sign * gvec_[i].
  auto load_gvec = [&](std::size_t slot) {
    std::fill(rhs_.begin(), rhs_.end(), 0.0);
    rhs_[slot] = 1.0;
    std::vector<double> z(k);
    lu_solve(lu_, perm_, k, rhs_.data(), z.data());
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += design[i * k + j] * z[j];
      gvec_[i] = s;
    }
  };

  auto is_basic = [&](std::size_t i) {
    for (std::size_t l = 0; l < k; ++l)
      if (basis_[l] == i) return true;
    return false;
  };

  // One-sided derivative along the (slot, sign) edge; gvec_ must hold slot.
  auto edge_derivative = [&](std::size_t slot, int sign) {
    double dtot = w[basis_[slot]] * (sign > 0 ? tau : 1.0 - tau);
    for (std::size_t i = 0; i < m; ++i) {
      if (is_basic(i)) continue;
      const double v = sign * gvec_[i];
      if (v == 0.0) continue;
      if (std::fabs(resid_[i]) <= tol_res) {
        dtot += w[i] * (v > 0.0 ? tau * v : (tau - 1.0) * v);
      } else {
        dtot += w[i] * (tau - (resid_[i] < 0.0 ? 1.0 : 0.0)) * v;
      }
    }
    return dtot;
  };

  // Walk breakpoints along the (slot, sign) edge starting from derivative d0;
  // returns the entering row, or m when the edge never turns uphill.
  auto line_search = [&](int sign, double d0) -> std::size_t {
    order_.clear();
    for (std::size_t i = 0; i < m; ++i) {
      if (is_basic(i) || std::fabs(resid_[i]) <= tol_res) continue;
      const double v = sign * gvec_[i];
      if (v == 0.0) continue;
      if ((resid_[i] > 0.0 && v < 0.0) || (resid_[i] < 0.0 && v > 0.0)) order_.push_back(i);
    }
    auto ratio = [&](std::size_t i) { return -resid_[i] / (sign * gvec_[i]); };
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      const double ta = ratio(a), tb = ratio(b);
      if (ta != tb) return ta < tb;
      return a < b;
    });
    double d = d0;
    for (std::size_t i : order_) {
      d += w[i] * std::fabs(sign * gvec_[i]);
      if (d >= 0.0) return i;
    }
    return m;
  };

  refresh();
  const std::size_t max_iter = 200 + 40 * m;
  std::size_t iter = 0;
  bool degenerate = false;

  for (;; ++iter) {
    if (iter > max_iter) throw NumericError("QuantileLpSolver: iteration limit exceeded");
    double best_d = -tol_opt;
    std::size_t best_slot = k;
    int best_sign = 0;
    for (std::size_t slot = 0; slot < k; ++slot) {
      load_gvec(slot);
      for (int sign : {+1, -1}) {
        const double d = edge_derivative(slot, sign);
        if (d < best_d) {
          best_d = d;
          best_slot = slot;
          best_sign = sign;
        }
      }
    }
    if (best_slot == k) break;  // all edges uphill (within tolerance)
    load_gvec(best_slot);
    const std::size_t entering = line_search(best_sign, best_d);
    if (entering == m) throw NumericError("QuantileLpSolver: unbounded edge (deficient design)");
    basis_[best_slot] = entering;
    refresh();
  }

  // Tie handling: walk zero-cost edges while they lead to a vertex with
  // lexicographically smaller gamma.
  {
    std::vector<double> cand_gamma(k);
    for (std::size_t moves = 0; moves < 64; ++moves) {
      bool moved = false;
      for (std::size_t slot = 0; slot < k && !moved; ++slot) {
        load_gvec(slot);
        for (int sign : {+1, -1}) {
          const double d = edge_derivative(slot, sign);
          if (std::fabs(d) > tol_tie) continue;
          degenerate = true;
          const std::size_t entering = line_search(sign, 0.0);
          if (entering == m) continue;
          const std::size_t old = basis_[slot];
          basis_[slot] = entering;
          // candidate vertex
          std::vector<double> saved_gamma = gamma_;
          refresh();
          cand_gamma = gamma_;
          bool smaller = false;
          for (std::size_t j = 0; j < k; ++j) {
            const double diff = cand_gamma[j] - saved_gamma[j];
            const double tol = 1e-12 * std::max(1.0, std::fabs(saved_gamma[j]));
            if (diff < -tol) {
              smaller = true;
              break;
            }
            if (diff > tol) break;
          }
          if (smaller) {
            moved = true;
            break;
          }
          basis_[slot] = old;
          refresh();
          gamma_ = saved_gamma;
        }
      }
      if (!moved) break;
    }
  }

  QuantileFit fit;
  fit.gamma.assign(gamma_.begin(), gamma_.end());
  fit.q_hat = gamma_[0];
  double obj = 0.0;
  for (std::size_t i = 0; i < m; ++i) obj += w[i] * check_loss(resid_[i], tau);
  fit.objective = obj;
  fit.degenerate = degenerate;
  fit.iterations = iter;
  return fit;
}

namespace {

struct LocalRows {
  std::vector<double> design;  // m x k
  std::vector<double> y;
  std::vector<double> w;
  double mass = 0.0;  // sum of per-outcome-row weighted kernel values
  std::size_t m = 0;
};

// Shared row assembly so that surface evaluation and single-point calls are
// bit-identical.
LocalRows assemble_local_rows(const Sample& sample, std::span<const double> x, double h, int r,
                              std::optional<long> group, const KernelSpec& kernel) {
  const std::size_t d = sample.dim();
  const std::size_t k = polynomial_basis_size(d, r);
  LocalRows rows;
  std::vector<double> u(d), basis(k);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (group && sample.group(i) != *group) continue;
    const auto xi = sample.x(i);
    for (std::size_t m2 = 0; m2 < d; ++m2) u[m2] = (xi[m2] - x[m2]) / h;
    const double kv = product_kernel(kernel, u);
    if (kv == 0.0) continue;
    const double wi = sample.weight(i) * kv;
    if (wi == 0.0) continue;
    polynomial_basis(u, r, basis);
    for (double b : sample.y(i)) {
      rows.design.insert(rows.design.end(), basis.begin(), basis.end());
      rows.y.push_back(b);
      rows.w.push_back(wi);
      rows.mass += wi;
      ++rows.m;
    }
  }
  return rows;
}

}  // namespace

QuantileFit local_poly_quantile(const Sample& sample, std::span<const double> x, double tau,
                                double h, int r, std::optional<long> group,
                                const KernelSpec& kernel) {
  if (!(h > 0.0)) throw std::invalid_argument("local_poly_quantile: h must be > 0");
  if (r < 0) throw std::invalid_argument("local_poly_quantile: r must be >= 0");
  const std::size_t k = polynomial_basis_size(sample.dim(), r);
  LocalRows rows = assemble_local_rows(sample, x, h, r, group, kernel);
  if (rows.m < k) {
    std::ostringstream msg;
    msg << "local_poly_quantile: insufficient local data at x = (";
    for (std::size_t m2 = 0; m2 < x.size(); ++m2) msg << (m2 ? ", " : "") << x[m2];
    msg << "), tau = " << tau << ": " << rows.m << " active rows for basis size " << k;
    throw NumericError(msg.str());
  }
  QuantileLpSolver solver;
  return solver.solve(rows.design, rows.m, k, rows.y, rows.w, tau);
}

QuantileSurface quantile_surface(const Sample& sample, const EvalGrid& grid, double h, int r,
                                 std::optional<long> group, const KernelSpec& kernel,
                                 double mass_floor_obs) {
  if (!(h > 0.0)) throw std::invalid_argument("quantile_surface: h must be > 0");
  if (grid.dim() != sample.dim()) throw NumericError("quantile_surface: grid dimension mismatch");
  if (group && sample.count_group(*group) == 0)
    throw DataError("quantile_surface: requested group has no observations");
  const std::size_t d = sample.dim();
  const std::size_t k = polynomial_basis_size(d, r);
  const double mass_floor =
      mass_floor_obs * sample.max_weight() * int_pow(kernel_peak(kernel), static_cast<int>(d));

  QuantileSurface out;
  const std::size_t g = grid.size();
  const std::size_t n_tau = grid.num_tau();
  out.q_hat.assign(g, 0.0);
  out.usable.assign(g, 0);
  out.effective_mass.assign(g, 0.0);

  QuantileLpSolver solver;
  std::vector<double> xg(d);
  std::size_t usable_count = 0;
  for (std::size_t px = 0; px < g / n_tau; ++px) {
    const std::size_t base = px * n_tau;
    grid.x_at(base, xg);
    LocalRows rows = assemble_local_rows(sample, xg, h, r, group, kernel);
    const bool enough = rows.m >= k && rows.mass > 0.0 && rows.mass >= mass_floor;
    for (std::size_t it = 0; it < n_tau; ++it) {
      const std::size_t p = base + it;
      out.effective_mass[p] = rows.mass;
      if (!enough) {
        ++out.failed_fits;
        continue;
      }
      try {
        QuantileFit fit = solver.solve(rows.design, rows.m, k, rows.y, rows.w, grid.tau_at(p));
        out.q_hat[p] = fit.q_hat;
        out.usable[p] = 1;
        ++usable_count;
        if (fit.degenerate) ++out.degenerate_fits;
      } catch (const NumericError&) {
        ++out.failed_fits;
      }
    }
  }
  if (usable_count == 0) throw NumericError("quantile_surface: usable region is empty");
  return out;
}

}  // namespace fitest
