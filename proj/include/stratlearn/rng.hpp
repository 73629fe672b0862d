#pragma once

#include <cstdint>
#include <random>

namespace stratlearn {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Random source whose output is identical on every platform.
///
/// std::normal_distribution and std::uniform_real_distribution are
/// implementation-defined, so the transforms from raw mt19937_64 bits are
/// done here.
class StableRng {
 public:
  explicit StableRng(std::uint64_t seed) : engine_(seed) {}

  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();                       // N(0, 1)

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace stratlearn
