#include "nutsedge/types.hpp"

#include <algorithm>

namespace nutsedge {

BoundingBox bbox_of_pixels(const std::vector<PixelPoint>& points) {
  require(!points.empty(), "bbox_of_pixels: empty point set");
  BoundingBox box{points[0].u, points[0].v, points[0].u, points[0].v};
  for (const auto& p : points) {
    box.u_left = std::min(box.u_left, p.u);
    box.v_bottom = std::min(box.v_bottom, p.v);
    box.u_right = std::max(box.u_right, p.u);
    box.v_top = std::max(box.v_top, p.v);
  }
  return box;
}

}  // namespace nutsedge
