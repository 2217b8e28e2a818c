#pragma once

#include <vector>

#include "nutsedge/types.hpp"

namespace nutsedge {

struct LossReport {
  double total = 0.0;
  std::vector<std::pair<int, double>> per_box;  // (box id, value)
  long pixel_count = 0;
};

enum class KlMode {
  Standard,  // sum p1*log(p1/p2), non-negative (Gibbs)
  Literal,   // printed leading-minus variant, for audit
  Binary,    // adds the Bernoulli complement term (1-p1)*log((1-p1)/(1-p2))
};

/// -sum p1*log(p2) over the box pixels, p1 restricted to {0,1}; p2 floored
/// at 1e-7 before the log.
LossReport cross_entropy(const FloatGrid& label, const FloatGrid& pred,
                         const std::vector<BoundingBox>& region);

LossReport kl_divergence(const FloatGrid& label, const FloatGrid& pred,
                         const std::vector<BoundingBox>& region, KlMode mode = KlMode::Standard);

}  // namespace nutsedge
