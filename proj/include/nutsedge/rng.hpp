#pragma once

#include <cstdint>
#include <string_view>

namespace nutsedge {

/// splitmix64; fixed algorithm so seeded runs are reproducible across
/// platforms and standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [lo, hi], inclusive.
  int64_t uniformInt(int64_t lo, int64_t hi) {
    const auto range = static_cast<uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<int64_t>(next());  // full 64-bit span
    // rejection sampling to avoid modulo bias
    const uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    uint64_t x;
    do { x = next(); } while (x >= limit);
    return lo + static_cast<int64_t>(x % range);
  }

  /// Uniform real in [lo, hi).
  double uniformReal(double lo, double hi) {
    const double unit = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return lo + unit * (hi - lo);
  }

  /// Standard normal via Box-Muller (one draw per call, no caching, so the
  /// stream position stays a pure function of call count).
  double normal();

 private:
  uint64_t state_;
};

/// Stage-local stream derivation: hash(master_seed, stage_name, item_index).
uint64_t derive_seed(uint64_t master_seed, std::string_view stage, uint64_t index);

}  // namespace nutsedge
