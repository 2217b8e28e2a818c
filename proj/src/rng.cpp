#include "nutsedge/rng.hpp"

#include <cmath>
#include <numbers>

namespace nutsedge {

double Rng::normal() {
  double u1;
  do { u1 = uniformReal(0.0, 1.0); } while (u1 <= 0.0);
  const double u2 = uniformReal(0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

uint64_t derive_seed(uint64_t master_seed, std::string_view stage, uint64_t index) {
  // FNV-1a over the stage name, then mixed with seed and index via splitmix.
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : stage) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  Rng mix(master_seed ^ h ^ (index * 0x9e3779b97f4a7c15ULL));
  return mix.next();
}

}  // namespace nutsedge
