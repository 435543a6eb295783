#include "fitest/contact.hpp"

#include <cmath>
#include <stdexcept>

namespace fitest {

std::vector<std::uint8_t> ContactSets::mask_for(std::uint32_t a_mask) const {
  std::vector<std::uint8_t> m(label.size(), 0);
  for (std::size_t p = 0; p < label.size(); ++p) m[p] = label[p] == a_mask ? 1 : 0;
  return m;
}

std::size_t ContactSets::count_in(std::uint32_t a_mask) const {
  std::size_t c = 0;
  for (std::uint32_t l : label)
    if (l == a_mask) ++c;
  return c;
}

ContactSets estimate_contact_sets(const FieldStack& u_hat, double c_hat_n) {
  if (!(c_hat_n > 0.0))
    throw std::invalid_argument("estimate_contact_sets: c_hat_n must be > 0");
  if (u_hat.J == 0 || u_hat.J > 16)
    throw std::invalid_argument("estimate_contact_sets: unsupported J");
  ContactSets out;
  out.J = u_hat.J;
  out.c_hat_n = c_hat_n;
  const std::size_t g = u_hat.usable.size();
  out.label.assign(g, 0);
  for (std::size_t p = 0; p < g; ++p) {
    if (!u_hat.usable[p]) continue;
    std::uint32_t a = 0;
    bool valid = true;
    for (std::size_t j = 0; j < u_hat.J; ++j) {
      const double u = u_hat.u[j][p];
      if (std::fabs(u) <= c_hat_n) {
        a |= (1u << j);
      } else if (!(u < -c_hat_n)) {
        valid = false;  // u_j > c_hat_n: the point is in no contact set
        break;
      }
    }
    if (valid && a != 0) out.label[p] = a;
  }
  return out;
}

}  // namespace fitest
