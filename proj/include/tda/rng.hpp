#pragma once

#include <cstdint>

namespace tda {

// 64-bit linear congruential generator with the documented constants
// multiplier 6364136223846793005 and increment 1442695040888963407.
// Every node seeds this identically, so matrices generated from a seed agree
// bit-for-bit across machines and with the test oracles. Unit draws map the
// top 53 bits of the state to [0, 1).
class Lcg {
public:
  explicit Lcg(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return state_;
  }

  // Uniform in [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double next_range(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

private:
  std::uint64_t state_;
};

// SplitMix64 finalizer; used to derive independent stream seeds from one
// scenario seed without correlating consecutive cells.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

}  // namespace tda
