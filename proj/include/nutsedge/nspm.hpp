#pragma once

#include <vector>

#include "nutsedge/annotations.hpp"
#include "nutsedge/types.hpp"

namespace nutsedge {

struct NspmParams {
  double sigma = 12.0;  // Gaussian scale of the leaf cross-section, pixels
};

/// Euclidean distance from p to the closest point of the closed segment.
double point_segment_distance(const Vec2& p, const LineSegment& l);

/// Per-box skeleton probability map. Inside a box, the per-segment Gaussian
/// falloffs are summed and clamped at 1 (peak-normalized, so the midrib is
/// exactly 1); overlapping boxes merge by per-pixel max; everything outside
/// all boxes is 0.
FloatGrid rasterize_nspm(const std::vector<BoundingBox>& boxes,
                         const std::vector<Skeleton>& skeletons, int width, int height,
                         const NspmParams& params);

/// Half-normal maximum-likelihood scale of the mask-pixel-to-skeleton
/// distance distribution, pooled over all templates:
/// sigma_hat = sqrt(mean of squared distances).
double estimate_sigma(const std::vector<NutsedgeTemplate>& templates);

}  // namespace nutsedge
