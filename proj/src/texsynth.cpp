#include "nutsedge/texsynth.hpp"

#include <cmath>
#include <limits>

#include "nutsedge/rng.hpp"

namespace nutsedge {
namespace {

struct SourcePos {
  int patch;
  int x;
  int y;
};

void check_params(const std::vector<BackgroundPatch>& patches, const SynthParams& params) {
  require(!patches.empty(), "texsynth: no patches");
  require(params.neighborhood >= 3 && params.neighborhood % 2 == 1,
          "texsynth: neighborhood must be odd and >= 3");
  require(params.epsilon >= 0.0, "texsynth: epsilon must be >= 0");
  require(params.out_width >= 1 && params.out_height >= 1, "texsynth: zero-area output");
  for (const auto& p : patches)
    require(p.patch.width() >= 3 && p.patch.height() >= 3, "texsynth: patch smaller than window");
}

Grid<double> gaussian_window(int side) {
  const int half = side / 2;
  const double sigma = side / 6.4;
  Grid<double> w(side, side);
  for (int dy = -half; dy <= half; ++dy)
    for (int dx = -half; dx <= half; ++dx)
      w(dy + half, dx + half) = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
  return w;
}

struct SeedBlock {
  int patch;
  int src_x, src_y;   // block origin in the patch
  int dst_x, dst_y;   // block origin in the output
  int w, h;
};

// The seed block and every subsequent RNG draw are a fixed function of the
// seed, so verify_synthesis can replay the layout.
SeedBlock pick_seed_block(const std::vector<BackgroundPatch>& patches, const SynthParams& params,
                          Rng& rng) {
  SeedBlock blk;
  blk.patch = static_cast<int>(rng.uniformInt(0, static_cast<int64_t>(patches.size()) - 1));
  const auto& p = patches[blk.patch].patch;
  blk.w = std::min({params.neighborhood, p.width(), params.out_width});
  blk.h = std::min({params.neighborhood, p.height(), params.out_height});
  blk.src_x = static_cast<int>(rng.uniformInt(0, p.width() - blk.w));
  blk.src_y = static_cast<int>(rng.uniformInt(0, p.height() - blk.h));
  blk.dst_x = (params.out_width - blk.w) / 2;
  blk.dst_y = (params.out_height - blk.h) / 2;
  return blk;
}

/// Pixels outside the seed block ordered by onion shell (Chebyshev ring
/// distance from the block), raster order within each shell.
std::vector<PixelPoint> fill_order(const SeedBlock& blk, int out_w, int out_h) {
  std::vector<std::pair<int, PixelPoint>> ranked;
  ranked.reserve(static_cast<size_t>(out_w) * out_h);
  for (int v = 0; v < out_h; ++v)
    for (int u = 0; u < out_w; ++u) {
      const int left = blk.dst_x - u, right = u - (blk.dst_x + blk.w - 1);
      const int up = blk.dst_y - v, down = v - (blk.dst_y + blk.h - 1);
      const int ring = std::max({0, left, right, up, down});
      if (ring > 0) ranked.emplace_back(ring, PixelPoint{u, v});
    }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<PixelPoint> order;
  order.reserve(ranked.size());
  for (const auto& [ring, p] : ranked) order.push_back(p);
  return order;
}

/// Gaussian-weighted mean SSD between the output neighborhood of (u,v) and
/// the source neighborhood of pos, over offsets that are filled in the
/// output and in-bounds in the source.
double neighborhood_distance(const RasterImage& out, const Grid<uint8_t>& filled, int u, int v,
                             const RasterImage& src, const SourcePos& pos, const Grid<double>& w) {
  const int half = static_cast<int>(w.rows()) / 2;
  double acc = 0.0, norm = 0.0;
  for (int dy = -half; dy <= half; ++dy) {
    const int ov = v + dy, sv = pos.y + dy;
    if (ov < 0 || ov >= out.height() || sv < 0 || sv >= src.height()) continue;
    for (int dx = -half; dx <= half; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const int ou = u + dx, su = pos.x + dx;
      if (ou < 0 || ou >= out.width() || su < 0 || su >= src.width()) continue;
      if (!filled(ov, ou)) continue;
      const double weight = w(dy + half, dx + half);
      double ssd = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = static_cast<double>(out.at(ou, ov, c)) - src.at(su, sv, c);
        ssd += d * d;
      }
      acc += weight * ssd;
      norm += weight;
    }
  }
  // a candidate whose window shares no valid position with the filled
  // context carries no evidence; treat it as inadmissible rather than a
  // perfect match
  return norm > 0.0 ? acc / norm : std::numeric_limits<double>::infinity();
}

std::vector<SourcePos> all_source_positions(const std::vector<BackgroundPatch>& patches) {
  std::vector<SourcePos> positions;
  for (size_t i = 0; i < patches.size(); ++i)
    for (int y = 0; y < patches[i].patch.height(); ++y)
      for (int x = 0; x < patches[i].patch.width(); ++x)
        positions.push_back({static_cast<int>(i), x, y});
  return positions;
}

double admissible_threshold(double d_min, double epsilon) {
  if (std::isinf(epsilon)) return std::numeric_limits<double>::infinity();
  return (1.0 + epsilon) * d_min;
}

}  // namespace

RasterImage synthesize_background(const std::vector<BackgroundPatch>& patches,
                                  const SynthParams& params) {
  check_params(patches, params);
  Rng rng(params.seed);
  const SeedBlock blk = pick_seed_block(patches, params, rng);
  const Grid<double> window = gaussian_window(params.neighborhood);
  const auto positions = all_source_positions(patches);

  RasterImage out(params.out_width, params.out_height);
  Grid<uint8_t> filled = Grid<uint8_t>::Zero(params.out_height, params.out_width);
  const auto& seed_src = patches[blk.patch].patch;
  for (int y = 0; y < blk.h; ++y)
    for (int x = 0; x < blk.w; ++x) {
      for (int c = 0; c < 3; ++c)
        out.at(blk.dst_x + x, blk.dst_y + y, c) = seed_src.at(blk.src_x + x, blk.src_y + y, c);
      filled(blk.dst_y + y, blk.dst_x + x) = 1;
    }

  std::vector<double> dist(positions.size());
  std::vector<size_t> candidates;
  for (const auto& px : fill_order(blk, params.out_width, params.out_height)) {
    double d_min = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < positions.size(); ++i) {
      dist[i] = neighborhood_distance(out, filled, px.u, px.v, patches[positions[i].patch].patch,
                                      positions[i], window);
      d_min = std::min(d_min, dist[i]);
    }
    const double limit = admissible_threshold(d_min, params.epsilon);
    candidates.clear();
    for (size_t i = 0; i < positions.size(); ++i)
      if (dist[i] <= limit) candidates.push_back(i);
    const auto pick =
        candidates[static_cast<size_t>(rng.uniformInt(0, static_cast<int64_t>(candidates.size()) - 1))];
    const auto& pos = positions[pick];
    for (int c = 0; c < 3; ++c)
      out.at(px.u, px.v, c) = patches[pos.patch].patch.at(pos.x, pos.y, c);
    filled(px.v, px.u) = 1;
  }
  return out;
}

SynthReport verify_synthesis(const std::vector<BackgroundPatch>& patches, const RasterImage& output,
                             const SynthParams& params) {
  check_params(patches, params);
  require(output.width() == params.out_width && output.height() == params.out_height,
          "verify_synthesis: output dims do not match params");
  Rng rng(params.seed);
  const SeedBlock blk = pick_seed_block(patches, params, rng);
  const Grid<double> window = gaussian_window(params.neighborhood);
  const auto positions = all_source_positions(patches);

  Grid<uint8_t> filled = Grid<uint8_t>::Zero(params.out_height, params.out_width);
  for (int y = 0; y < blk.h; ++y)
    for (int x = 0; x < blk.w; ++x) filled(blk.dst_y + y, blk.dst_x + x) = 1;

  SynthReport report;
  for (const auto& px : fill_order(blk, params.out_width, params.out_height)) {
    double d_min = std::numeric_limits<double>::infinity();
    double chosen = std::numeric_limits<double>::infinity();
    for (const auto& pos : positions) {
      const auto& src = patches[pos.patch].patch;
      const double d = neighborhood_distance(output, filled, px.u, px.v, src, pos, window);
      d_min = std::min(d_min, d);
      if (src.at(pos.x, pos.y, 0) == output.at(px.u, px.v, 0) &&
          src.at(pos.x, pos.y, 1) == output.at(px.u, px.v, 1) &&
          src.at(pos.x, pos.y, 2) == output.at(px.u, px.v, 2))
        chosen = std::min(chosen, d);
    }
    ++report.pixels_checked;
    if (!(chosen <= admissible_threshold(d_min, params.epsilon) + 1e-9))
      report.violations.push_back({px.u, px.v, d_min, chosen});
    filled(px.v, px.u) = 1;
  }
  return report;
}

}  // namespace nutsedge
