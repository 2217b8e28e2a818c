#pragma once

#include <vector>

#include "nutsedge/annotations.hpp"
#include "nutsedge/types.hpp"

namespace nutsedge {

struct SynthParams {
  int neighborhood = 25;  // odd window side, >= 3
  double epsilon = 0.1;   // candidate tolerance, >= 0
  int out_width = 0;
  int out_height = 0;
  uint64_t seed = 0;
};

/// Per-pixel non-parametric texture synthesis. The output starts from a
/// random seed block copied out of a random patch and grows outward in
/// onion-shell order; each new pixel is drawn uniformly from the source
/// pixels whose Gaussian-weighted SSD against the already-filled
/// neighborhood is within (1+epsilon) of the best match.
RasterImage synthesize_background(const std::vector<BackgroundPatch>& patches,
                                  const SynthParams& params);

struct SynthViolation {
  int u = 0;
  int v = 0;
  double best_distance = 0.0;
  double chosen_distance = 0.0;
};

struct SynthReport {
  std::vector<SynthViolation> violations;
  long pixels_checked = 0;
};

/// Re-derives the fill order and, for every grown pixel, rescans all source
/// pixels to recompute d_min; reports pixels whose color is not attainable
/// within (1+epsilon)*d_min.
SynthReport verify_synthesis(const std::vector<BackgroundPatch>& patches,
                             const RasterImage& output, const SynthParams& params);

}  // namespace nutsedge
