#pragma once

#include "nutsedge/annotations.hpp"
#include "nutsedge/types.hpp"

namespace nutsedge {

struct DecodeParams {
  int dilate_radius = 2;
  int erode_radius = 2;
  double blur_sigma = 3.0;
  double nms_threshold = 0.3;
  int min_component = 10;
};

/// Grayscale dilation then erosion (disc structuring element), followed by
/// Gaussian blur truncated at 3*sigma and renormalized at the borders.
FloatGrid smooth_map(const FloatGrid& map, const DecodeParams& params);

struct DecodedSkeleton {
  Grid<uint8_t> pixel_mask;  // surviving NMS pixels
  Skeleton skeleton;         // split-and-merge polyline fit per component
};

/// Keep pixels above the threshold that are local maxima along the
/// direction across the ridge (structure-tensor orientation), link them
/// 8-connectedly, drop small components, and vectorize each component.
DecodedSkeleton nms_skeleton(const FloatGrid& smoothed, const DecodeParams& params);

}  // namespace nutsedge
