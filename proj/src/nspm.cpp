#include "nutsedge/nspm.hpp"

#include <cmath>

namespace nutsedge {

double point_segment_distance(const Vec2& p, const LineSegment& l) {
  const Vec2 d = l.b - l.a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (p - l.a).norm();
  const double t = std::clamp((p - l.a).dot(d) / len2, 0.0, 1.0);
  // (p - a) - t*d rather than p - (a + t*d): every intermediate negates
  // exactly under reflection, keeping mirrored inputs bit-symmetric
  return ((p - l.a) - t * d).norm();
}

FloatGrid rasterize_nspm(const std::vector<BoundingBox>& boxes,
                         const std::vector<Skeleton>& skeletons, int width, int height,
                         const NspmParams& params) {
  require(params.sigma > 0.0, "rasterize_nspm: sigma must be > 0");
  require(boxes.size() == skeletons.size(), "rasterize_nspm: skeleton without box");
  require(width >= 1 && height >= 1, "rasterize_nspm: bad dims");

  FloatGrid map = FloatGrid::Zero(height, width);
  const double inv2s2 = 1.0 / (2.0 * params.sigma * params.sigma);
  for (size_t i = 0; i < boxes.size(); ++i) {
    const auto& box = boxes[i];
    require(box.u_left >= 0 && box.v_bottom >= 0 && box.u_right < width && box.v_top < height,
            "rasterize_nspm: box outside image");
    // raw per-box sum; overlapping boxes merge by max, then clamp
    for (int v = box.v_bottom; v <= box.v_top; ++v)
      for (int u = box.u_left; u <= box.u_right; ++u) {
        double raw = 0.0;
        for (const auto& seg : skeletons[i].segments) {
          const double d = point_segment_distance(Vec2(u, v), seg);
          raw += std::exp(-d * d * inv2s2);
        }
        map(v, u) = std::max(map(v, u), std::min(raw, 1.0));
      }
  }
  return map;
}

double estimate_sigma(const std::vector<NutsedgeTemplate>& templates) {
  require(!templates.empty(), "estimate_sigma: empty template library");
  double sum_sq = 0.0;
  long count = 0;
  for (const auto& tmpl : templates) {
    require(!tmpl.skeleton.segments.empty(), "estimate_sigma: template lacking skeleton");
    for (Eigen::Index lv = 0; lv < tmpl.mask.rows(); ++lv)
      for (Eigen::Index lu = 0; lu < tmpl.mask.cols(); ++lu) {
        if (!tmpl.mask(lv, lu)) continue;
        const Vec2 p(tmpl.box.u_left + static_cast<double>(lu),
                     tmpl.box.v_bottom + static_cast<double>(lv));
        double d = std::numeric_limits<double>::infinity();
        for (const auto& seg : tmpl.skeleton.segments)
          d = std::min(d, point_segment_distance(p, seg));
        sum_sq += d * d;
        ++count;
      }
  }
  require(count > 0, "estimate_sigma: no mask pixels");
  const double sigma = std::sqrt(sum_sq / count);
  require(sigma > 0.0, "estimate_sigma: all mask pixels lie on the skeleton");
  return sigma;
}

}  // namespace nutsedge
