#include "nutsedge/compose.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "nutsedge/rng.hpp"

namespace nutsedge {
namespace {

constexpr double kMinKeptAreaFraction = 0.2;
constexpr int kMaxPlacementRetries = 100;

struct Placement {
  double theta, t_x, t_y;
  std::vector<PixelPoint> support;
  std::vector<PixelPoint> provenance;
};

/// Inverse-map the output region covered by the transformed box; each
/// output pixel pulls from at most one template pixel (nearest neighbor).
Placement place_template(const NutsedgeTemplate& tmpl, int out_w, int out_h, double theta,
                         double cx, double cy) {
  Placement pl;
  pl.theta = theta;
  const double c = std::cos(theta), s = std::sin(theta);
  const int tw = tmpl.box.width(), th = tmpl.box.height();
  const Vec2 center((tw - 1) / 2.0, (th - 1) / 2.0);
  // translation that lands the template center on (cx, cy)
  pl.t_x = cx - (c * center.x() + s * center.y());
  pl.t_y = cy - (-s * center.x() + c * center.y());

  // output-space bbox of the transformed template rectangle
  double xmin = 1e30, xmax = -1e30, ymin = 1e30, ymax = -1e30;
  for (const Vec2 corner : {Vec2(0, 0), Vec2(tw - 1, 0), Vec2(0, th - 1), Vec2(tw - 1, th - 1)}) {
    const Vec2 q = rigid_transform(corner, theta, pl.t_x, pl.t_y);
    xmin = std::min(xmin, q.x());
    xmax = std::max(xmax, q.x());
    ymin = std::min(ymin, q.y());
    ymax = std::max(ymax, q.y());
  }
  const int u0 = std::max(0, static_cast<int>(std::floor(xmin)) - 1);
  const int u1 = std::min(out_w - 1, static_cast<int>(std::ceil(xmax)) + 1);
  const int v0 = std::max(0, static_cast<int>(std::floor(ymin)) - 1);
  const int v1 = std::min(out_h - 1, static_cast<int>(std::ceil(ymax)) + 1);

  for (int v = v0; v <= v1; ++v)
    for (int u = u0; u <= u1; ++u) {
      // inverse of the paper matrix: rotate back by R^T
      const double dx = u - pl.t_x, dy = v - pl.t_y;
      const int lu = static_cast<int>(std::lround(c * dx - s * dy));
      const int lv = static_cast<int>(std::lround(s * dx + c * dy));
      if (lu < 0 || lu >= tw || lv < 0 || lv >= th || !tmpl.mask(lv, lu)) continue;
      pl.support.push_back({u, v});
      pl.provenance.push_back({lu, lv});
    }
  return pl;
}

void apply_brightness(RasterImage& image, double factor) {
  for (int v = 0; v < image.height(); ++v)
    for (int u = 0; u < image.width(); ++u) {
      const int value = std::max({image.at(u, v, 0), image.at(u, v, 1), image.at(u, v, 2)});
      if (value == 0) continue;
      const double target = std::min(255.0, value * factor);
      const double scale = target / value;
      for (int c = 0; c < 3; ++c)
        image.at(u, v, c) =
            static_cast<uint8_t>(std::min(255.0, std::round(image.at(u, v, c) * scale)));
    }
}

}  // namespace

void ComposeConfig::validate() const {
  require(density_min > 0.0 && density_min <= density_max, "compose: bad density range");
  require(brightness_min > 0.0 && brightness_min <= brightness_max,
          "compose: bad brightness range");
  require(images_to_generate >= 1, "compose: images_to_generate must be >= 1");
}

Vec2 rigid_transform(const Vec2& p, double theta, double t_x, double t_y) {
  const double c = std::cos(theta), s = std::sin(theta);
  return Vec2(c * p.x() + s * p.y() + t_x, -s * p.x() + c * p.y() + t_y);
}

std::vector<Vec2> rigid_transform(const std::vector<Vec2>& points, double theta, double t_x,
                                  double t_y) {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(rigid_transform(p, theta, t_x, t_y));
  return out;
}

ComposeResult compose_image(const RasterImage& background,
                            const std::vector<NutsedgeTemplate>& templates,
                            const ComposeConfig& cfg, uint64_t seed) {
  cfg.validate();
  require(!templates.empty(), "compose: empty template library");
  for (const auto& tmpl : templates)
    require(tmpl.box.width() <= background.width() && tmpl.box.height() <= background.height(),
            "compose: template larger than background");

  Rng rng(seed);
  const double area = static_cast<double>(background.width()) * background.height();
  const auto n_min = std::llround(cfg.density_min * area / 1e6);
  const auto n_max = std::llround(cfg.density_max * area / 1e6);
  const auto count = rng.uniformInt(n_min, n_max);

  ComposeResult result;
  result.image = background;

  for (long i = 0; i < count; ++i) {
    const auto tid = static_cast<int>(rng.uniformInt(0, static_cast<int64_t>(templates.size()) - 1));
    const auto& tmpl = templates[tid];

    Placement pl;
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementRetries; ++attempt) {
      const double theta = rng.uniformReal(0.0, 2.0 * std::numbers::pi);
      const double cx = static_cast<double>(rng.uniformInt(0, background.width() - 1));
      const double cy = static_cast<double>(rng.uniformInt(0, background.height() - 1));
      pl = place_template(tmpl, background.width(), background.height(), theta, cx, cy);
      if (static_cast<double>(pl.support.size()) >= kMinKeptAreaFraction * tmpl.maskArea()) {
        placed = true;
        break;
      }
    }
    require(placed, "compose: could not place template after retries");

    PlacedInstance inst;
    inst.template_id = tid;
    inst.theta = pl.theta;
    inst.t_x = pl.t_x;
    inst.t_y = pl.t_y;
    inst.mask_support = std::move(pl.support);
    inst.provenance = std::move(pl.provenance);
    inst.box = bbox_of_pixels(inst.mask_support);

    // skeleton and polygon stay real-valued; convert to box-local first
    for (const auto& seg : tmpl.skeleton.segments) {
      const Vec2 local_a(seg.a.x() - tmpl.box.u_left, seg.a.y() - tmpl.box.v_bottom);
      const Vec2 local_b(seg.b.x() - tmpl.box.u_left, seg.b.y() - tmpl.box.v_bottom);
      inst.skeleton.segments.push_back({rigid_transform(local_a, pl.theta, pl.t_x, pl.t_y),
                                        rigid_transform(local_b, pl.theta, pl.t_x, pl.t_y)});
    }
    for (const auto& p : tmpl.polygon) {
      const Vec2 local(p.x() - tmpl.box.u_left, p.y() - tmpl.box.v_bottom);
      inst.polygon.push_back(rigid_transform(local, pl.theta, pl.t_x, pl.t_y));
    }

    for (size_t k = 0; k < inst.mask_support.size(); ++k) {
      const auto& dst = inst.mask_support[k];
      const auto& src = inst.provenance[k];
      for (int c = 0; c < 3; ++c)
        result.image.at(dst.u, dst.v, c) = tmpl.patch.at(src.u, src.v, c);
    }
    result.instances.push_back(std::move(inst));
  }

  result.brightness_factor = rng.uniformReal(cfg.brightness_min, cfg.brightness_max);
  apply_brightness(result.image, result.brightness_factor);

  result.annotations.image_width = background.width();
  result.annotations.image_height = background.height();
  for (size_t i = 0; i < result.instances.size(); ++i) {
    result.annotations.boxes.push_back(result.instances[i].box);
    result.annotations.skeletons.emplace_back(static_cast<int>(i), result.instances[i].skeleton);
  }
  return result;
}

nlohmann::json export_coco(
    const std::vector<std::pair<CocoImageRecord, std::vector<PlacedInstance>>>& dataset) {
  using nlohmann::json;
  json images = json::array();
  json annotations = json::array();
  std::set<int> seen_ids;
  int annotation_id = 1;
  for (const auto& [record, instances] : dataset) {
    require(seen_ids.insert(record.id).second, "export_coco: duplicate image id");
    images.push_back({{"id", record.id},
                      {"file_name", record.file_name},
                      {"width", record.width},
                      {"height", record.height}});
    for (const auto& inst : instances) {
      json seg_ring = json::array();
      for (const auto& p : inst.polygon) {
        seg_ring.push_back(p.x());
        seg_ring.push_back(p.y());
      }
      json skeleton = json::array();
      for (const auto& seg : inst.skeleton.segments)
        skeleton.push_back({seg.a.x(), seg.a.y(), seg.b.x(), seg.b.y()});
      annotations.push_back(
          {{"id", annotation_id++},
           {"image_id", record.id},
           {"category_id", 1},
           {"bbox",
            {inst.box.u_left, inst.box.v_bottom, inst.box.width(), inst.box.height()}},
           {"area", inst.mask_support.size()},
           {"segmentation", json::array({seg_ring})},
           {"skeleton", skeleton},
           {"iscrowd", 0}});
    }
  }
  return json{{"images", images},
              {"annotations", annotations},
              {"categories", json::array({{{"id", 1}, {"name", "nutsedge"}}})}};
}

}  // namespace nutsedge
