#include "nutsedge/skeldecode.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace nutsedge {
namespace {

FloatGrid morphology(const FloatGrid& map, int radius, bool dilate) {
  if (radius <= 0) return map;
  const auto rows = map.rows(), cols = map.cols();
  FloatGrid out(rows, cols);
  std::vector<std::pair<int, int>> disc;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) disc.emplace_back(dx, dy);
  for (Eigen::Index v = 0; v < rows; ++v)
    for (Eigen::Index u = 0; u < cols; ++u) {
      double extreme = map(v, u);
      for (const auto& [dx, dy] : disc) {
        const Eigen::Index uu = u + dx, vv = v + dy;
        if (uu < 0 || uu >= cols || vv < 0 || vv >= rows) continue;
        extreme = dilate ? std::max(extreme, map(vv, uu)) : std::min(extreme, map(vv, uu));
      }
      out(v, u) = extreme;
    }
  return out;
}

/// Separable Gaussian, kernel truncated at 3*sigma, per-pixel weight
/// renormalization at the borders (constants are preserved).
FloatGrid gaussian_blur(const FloatGrid& map, double sigma) {
  if (sigma <= 0.0) return map;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i)
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));

  const auto rows = map.rows(), cols = map.cols();
  FloatGrid tmp(rows, cols), out(rows, cols);
  for (Eigen::Index v = 0; v < rows; ++v)
    for (Eigen::Index u = 0; u < cols; ++u) {
      double acc = 0.0, norm = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const Eigen::Index uu = u + i;
        if (uu < 0 || uu >= cols) continue;
        acc += kernel[i + radius] * map(v, uu);
        norm += kernel[i + radius];
      }
      tmp(v, u) = acc / norm;
    }
  for (Eigen::Index v = 0; v < rows; ++v)
    for (Eigen::Index u = 0; u < cols; ++u) {
      double acc = 0.0, norm = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const Eigen::Index vv = v + i;
        if (vv < 0 || vv >= rows) continue;
        acc += kernel[i + radius] * tmp(vv, u);
        norm += kernel[i + radius];
      }
      out(v, u) = acc / norm;
    }
  return out;
}

double bilinear(const FloatGrid& map, double x, double y) {
  const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0, fy = y - y0;
  const auto sample = [&](int u, int v) -> double {
    if (u < 0 || u >= map.cols() || v < 0 || v >= map.rows()) return 0.0;
    return map(v, u);
  };
  return ((1 - fy) * ((1 - fx) * sample(x0, y0) + fx * sample(x0 + 1, y0)) +
                            fy * ((1 - fx) * sample(x0, y0 + 1) + fx * sample(x0 + 1, y0 + 1)));
}

struct BfsResult {
  PixelPoint farthest;
  std::vector<PixelPoint> path_to_farthest;
};

BfsResult bfs_farthest(const PixelPoint& start, const Grid<int>& label, int id) {
  std::deque<PixelPoint> queue{start};
  Grid<uint8_t> visited = Grid<uint8_t>::Zero(label.rows(), label.cols());
  Grid<int> parent_u = Grid<int>::Constant(label.rows(), label.cols(), -1);
  Grid<int> parent_v = Grid<int>::Constant(label.rows(), label.cols(), -1);
  visited(start.v, start.u) = 1;
  PixelPoint last = start;
  while (!queue.empty()) {
    const PixelPoint p = queue.front();
    queue.pop_front();
    last = p;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int u = p.u + dx, v = p.v + dy;
        if (u < 0 || u >= label.cols() || v < 0 || v >= label.rows()) continue;
        if (label(v, u) != id || visited(v, u)) continue;
        visited(v, u) = 1;
        parent_u(v, u) = p.u;
        parent_v(v, u) = p.v;
        queue.push_back({u, v});
      }
  }
  BfsResult result{last, {}};
  PixelPoint p = last;
  while (!(p.u == start.u && p.v == start.v)) {
    result.path_to_farthest.push_back(p);
    p = {parent_u(p.v, p.u), parent_v(p.v, p.u)};
  }
  result.path_to_farthest.push_back(start);
  std::reverse(result.path_to_farthest.begin(), result.path_to_farthest.end());
  return result;
}

/// Longest 8-connected path through a component (double BFS), as an ordered
/// pixel chain.
std::vector<PixelPoint> component_path(const std::vector<PixelPoint>& component,
                                       const Grid<int>& label, int id) {
  const PixelPoint far_end = bfs_farthest(component.front(), label, id).farthest;
  return bfs_farthest(far_end, label, id).path_to_farthest;
}

double point_line_deviation(const PixelPoint& p, const PixelPoint& a, const PixelPoint& b) {
  const Vec2 pa(p.u - a.u, p.v - a.v), ba(b.u - a.u, b.v - a.v);
  const double len = ba.norm();
  if (len == 0.0) return pa.norm();
  return std::abs(ba.x() * pa.y() - ba.y() * pa.x()) / len;
}

/// Split-and-merge polyline fit with a fixed deviation tolerance.
void split_fit(const std::vector<PixelPoint>& path, size_t lo, size_t hi, double tol,
               std::vector<size_t>& knots) {
  double worst = 0.0;
  size_t split = lo;
  for (size_t i = lo + 1; i < hi; ++i) {
    const double d = point_line_deviation(path[i], path[lo], path[hi]);
    if (d > worst) {
      worst = d;
      split = i;
    }
  }
  if (worst > tol) {
    split_fit(path, lo, split, tol, knots);
    knots.push_back(split);
    split_fit(path, split, hi, tol, knots);
  }
}

}  // namespace

FloatGrid smooth_map(const FloatGrid& map, const DecodeParams& params) {
  FloatGrid out = morphology(map, params.dilate_radius, /*dilate=*/true);
  out = morphology(out, params.erode_radius, /*dilate=*/false);
  out = gaussian_blur(out, params.blur_sigma);
  return out.cwiseMax(0.0).cwiseMin(1.0);
}

DecodedSkeleton nms_skeleton(const FloatGrid& smoothed, const DecodeParams& params) {
  require(params.nms_threshold > 0.0 && params.nms_threshold < 1.0,
          "nms_skeleton: threshold must be in (0,1)");
  const auto rows = smoothed.rows(), cols = smoothed.cols();

  // structure tensor, smoothed with the same sigma
  FloatGrid gx = FloatGrid::Zero(rows, cols), gy = FloatGrid::Zero(rows, cols);
  for (Eigen::Index v = 0; v < rows; ++v)
    for (Eigen::Index u = 0; u < cols; ++u) {
      const auto left = smoothed(v, std::max<Eigen::Index>(u - 1, 0));
      const auto right = smoothed(v, std::min(u + 1, cols - 1));
      const auto up = smoothed(std::max<Eigen::Index>(v - 1, 0), u);
      const auto down = smoothed(std::min(v + 1, rows - 1), u);
      gx(v, u) = 0.5 * (right - left);
      gy(v, u) = 0.5 * (down - up);
    }
  const FloatGrid jxx = gaussian_blur(gx * gx, params.blur_sigma);
  const FloatGrid jxy = gaussian_blur(gx * gy, params.blur_sigma);
  const FloatGrid jyy = gaussian_blur(gy * gy, params.blur_sigma);

  DecodedSkeleton result;
  result.pixel_mask = Grid<uint8_t>::Zero(rows, cols);
  for (Eigen::Index v = 0; v < rows; ++v)
    for (Eigen::Index u = 0; u < cols; ++u) {
      const double value = smoothed(v, u);
      if (value < params.nms_threshold) continue;
      // dominant eigenvector = direction of maximum variation (across the ridge)
      const double phi = 0.5 * std::atan2(2.0 * jxy(v, u), jxx(v, u) - jyy(v, u));
      const double ex = std::cos(phi), ey = std::sin(phi);
      const double n1 = bilinear(smoothed, u + ex, v + ey);
      const double n2 = bilinear(smoothed, u - ex, v - ey);
      if (value > n1 && value >= n2) result.pixel_mask(v, u) = 1;
    }

  // 8-connected components, small ones dropped
  Grid<int> label = Grid<int>::Constant(rows, cols, 0);
  std::vector<std::vector<PixelPoint>> components;
  int next_id = 0;
  for (Eigen::Index sv = 0; sv < rows; ++sv)
    for (Eigen::Index su = 0; su < cols; ++su) {
      if (!result.pixel_mask(sv, su) || label(sv, su) != 0) continue;
      ++next_id;
      std::vector<PixelPoint> comp;
      std::deque<PixelPoint> queue{{static_cast<int>(su), static_cast<int>(sv)}};
      label(sv, su) = next_id;
      while (!queue.empty()) {
        const PixelPoint p = queue.front();
        queue.pop_front();
        comp.push_back(p);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int u = p.u + dx, v = p.v + dy;
            if ((dx == 0 && dy == 0) || u < 0 || u >= cols || v < 0 || v >= rows) continue;
            if (!result.pixel_mask(v, u) || label(v, u) != 0) continue;
            label(v, u) = next_id;
            queue.push_back({u, v});
          }
      }
      components.push_back(std::move(comp));
    }

  for (const auto& comp : components) {
    if (static_cast<int>(comp.size()) < params.min_component) {
      for (const auto& p : comp) result.pixel_mask(p.v, p.u) = 0;
      continue;
    }
    const int id = label(comp.front().v, comp.front().u);
    const auto path = component_path(comp, label, id);
    if (path.size() < 2) continue;
    std::vector<size_t> knots{0};
    split_fit(path, 0, path.size() - 1, 2.0, knots);
    knots.push_back(path.size() - 1);
    for (size_t i = 0; i + 1 < knots.size(); ++i) {
      const auto& a = path[knots[i]];
      const auto& b = path[knots[i + 1]];
      result.skeleton.segments.push_back(
          {Vec2(a.u, a.v), Vec2(b.u, b.v)});
    }
  }
  return result;
}

}  // namespace nutsedge
