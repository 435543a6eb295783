#pragma once

#include <cstdint>
#include <vector>

#include "fitest/fields.hpp"

namespace fitest {

// Estimated contact sets B_A(c_n) for every nonempty A in 2^{1..J}. A grid
// point belongs to the set indexed by A = {j : |u_j| <= c_n} exactly when
// every remaining index satisfies u_j < -c_n; the sets are pairwise disjoint
// by construction and contained in the usable region. label stores the
// bitmask of A per point (0 = no set).
struct ContactSets {
  std::size_t J = 0;
  double c_hat_n = 0.0;
  std::vector<std::uint32_t> label;

  std::vector<std::uint8_t> mask_for(std::uint32_t a_mask) const;
  std::size_t count_in(std::uint32_t a_mask) const;
};

ContactSets estimate_contact_sets(const FieldStack& u_hat, double c_hat_n);

}  // namespace fitest
