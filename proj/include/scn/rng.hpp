#pragma once

#include <cstdint>
#include <random>

namespace scn {

std::uint64_t splitmix64(std::uint64_t x);

// Seed of an independent stream keyed by (realization, chain, signal).
std::uint64_t stream_seed(std::uint64_t base, std::uint64_t realization, std::uint64_t chain,
                          std::uint64_t signal);

// mt19937_64 with draw algorithms implemented here, so sequences do not depend
// on the standard library's distribution classes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }
  double uniform01();                // [0, 1) with 53 random bits
  int uniform_int(int lo, int hi);   // inclusive, unbiased
  double normal();                   // standard normal, polar method
  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace scn
