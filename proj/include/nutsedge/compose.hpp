#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nutsedge/annotations.hpp"
#include "nutsedge/types.hpp"

namespace nutsedge {

struct ComposeConfig {
  double density_min = 5.0;  // plants per 10^6 pixels
  double density_max = 10.0;
  double brightness_min = 0.8;  // multiplicative V-channel factors
  double brightness_max = 1.2;
  uint64_t seed = 0;
  int images_to_generate = 1;

  void validate() const;
};

struct PlacedInstance {
  int template_id = 0;
  double theta = 0.0;  // rotation, radians in [0, 2pi)
  double t_x = 0.0;
  double t_y = 0.0;
  Skeleton skeleton;                       // transformed, image coordinates
  std::vector<Vec2> polygon;               // transformed template outline
  std::vector<PixelPoint> mask_support;    // clipped, image coordinates
  std::vector<PixelPoint> provenance;      // template-local source pixel per support pixel
  BoundingBox box;                         // bbox of mask_support
};

/// Paper transform: [[cos, sin, tx], [-sin, cos, ty], [0,0,1]].
Vec2 rigid_transform(const Vec2& p, double theta, double t_x, double t_y);
std::vector<Vec2> rigid_transform(const std::vector<Vec2>& points, double theta, double t_x,
                                  double t_y);

struct ComposeResult {
  RasterImage image;
  AnnotationSet annotations;
  std::vector<PlacedInstance> instances;
  double brightness_factor = 1.0;
};

/// Place a uniform-count batch of templates onto the background with random
/// rotation and in-bounds translation, composite by mask (nearest-neighbor
/// resampling, later placements on top), then apply one per-image V-channel
/// brightness factor. Placements whose clipped mask drops below 20% of the
/// template area are redrawn.
ComposeResult compose_image(const RasterImage& background,
                            const std::vector<NutsedgeTemplate>& templates,
                            const ComposeConfig& cfg, uint64_t seed);

struct CocoImageRecord {
  int id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
};

/// COCO-style dataset JSON: bbox [x,y,w,h] with inclusive pixel widths,
/// polygon segmentation, single "nutsedge" category, and a nonstandard
/// per-annotation "skeleton" field.
nlohmann::json export_coco(
    const std::vector<std::pair<CocoImageRecord, std::vector<PlacedInstance>>>& dataset);

}  // namespace nutsedge
