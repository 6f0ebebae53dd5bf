#pragma once

#include <complex>
#include <cstdint>

namespace fov {

// xoshiro256** with splitmix64 seeding. Self-contained so that streams are
// reproducible byte-for-byte across platforms and standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();   // [0, 1)
  double gaussian();  // standard normal, Box-Muller
  std::complex<double> cgaussian();

  // Independent child stream for task `index` of a seeded computation.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index);

private:
  std::uint64_t s_[4];
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace fov
