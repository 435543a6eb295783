#pragma once

#include <cstdint>
#include <random>

namespace fitest {

// Seeded random stream. Equal (seed, stream_id) pairs reproduce the same
// draw sequence; distinct stream ids give streams that are independent for
// all practical purposes. Substreams are derived by hashing the parent
// stream id, so replication r and bootstrap draw b within it never collide.
//
// All variate transformations are implemented here rather than with
// std::uniform_*_distribution, whose output is not pinned by the standard;
// the sequences below are identical across platforms and library versions.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Derived substream, deterministic in (seed, stream_id, i).
  RandomSource stream(std::uint64_t i) const;

  std::uint64_t next_u64();
  double uniform01();                            // [0, 1)
  double uniform(double lo, double hi);          // [lo, hi)
  std::uint64_t uniform_index(std::uint64_t n);  // {0, ..., n-1}
  double normal();                               // N(0,1), inverse-CDF method

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

// Quantile function of the standard normal, Wichura's AS 241 (PPND16).
double normal_quantile(double p);

double normal_pdf(double x);
double normal_cdf(double x);

}  // namespace fitest
