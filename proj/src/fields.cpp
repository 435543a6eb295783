#include "fitest/fields.hpp"

#include <stdexcept>

#include "fitest/common.hpp"

namespace fitest {

FieldStack studentize(const RawFields& f, std::span<const double> r_n) {
  const std::size_t J = f.v_hat.size();
  if (J == 0 || r_n.size() != J || f.sigma_hat.size() != J)
    throw std::invalid_argument("studentize: inconsistent field shapes");
  const std::size_t g = f.usable.size();
  FieldStack out;
  out.J = J;
  out.usable = f.usable;
  out.u.assign(J, std::vector<double>(g, 0.0));
  for (std::size_t j = 0; j < J; ++j) {
    if (f.v_hat[j].size() != g || f.sigma_hat[j].size() != g)
      throw std::invalid_argument("studentize: inconsistent field shapes");
    for (std::size_t p = 0; p < g; ++p) {
      if (!f.usable[p]) continue;
      const double s = f.sigma_hat[j][p];
      out.u[j][p] = s > 0.0 ? r_n[j] * f.v_hat[j][p] / s : 0.0;
    }
  }
  return out;
}

FieldStack center_bootstrap(const RawFields& original, const RawFields& boot,
                            std::span<const double> r_n) {
  const std::size_t J = original.v_hat.size();
  if (boot.v_hat.size() != J || r_n.size() != J)
    throw std::invalid_argument("center_bootstrap: inconsistent field shapes");
  const std::size_t g = original.usable.size();
  if (boot.usable.size() != g)
    throw std::invalid_argument("center_bootstrap: inconsistent grid sizes");
  FieldStack out;
  out.J = J;
  out.usable.assign(g, 0);
  out.u.assign(J, std::vector<double>(g, 0.0));
  bool any = false;
  for (std::size_t p = 0; p < g; ++p) {
    if (!original.usable[p] || !boot.usable[p]) continue;
    bool ok = true;
    for (std::size_t j = 0; j < J && ok; ++j) {
      const double dv = boot.v_hat[j][p] - original.v_hat[j][p];
      const double s = boot.sigma_hat[j][p];
      if (s > 0.0) {
        out.u[j][p] = r_n[j] * dv / s;
      } else if (dv == 0.0) {
        out.u[j][p] = 0.0;
      } else {
        ok = false;
      }
    }
    if (ok) {
      out.usable[p] = 1;
      any = true;
    } else {
      for (std::size_t j = 0; j < J; ++j) out.u[j][p] = 0.0;
    }
  }
  if (!any) throw NumericError("center_bootstrap: resample unusable everywhere");
  return out;
}

}  // namespace fitest
