#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nutsedge/types.hpp"

namespace nutsedge {

struct LineSegment {
  Vec2 a;
  Vec2 b;
};

/// Plant skeleton: one line segment per leaf midrib.
struct Skeleton {
  std::vector<LineSegment> segments;
};

/// Foreground cutout of a single plant. Mask and patch are stored in
/// box-local coordinates (row 0 = box.v_bottom); polygon and skeleton stay
/// in source-image coordinates.
struct NutsedgeTemplate {
  std::vector<Vec2> polygon;
  Grid<uint8_t> mask;  // 1 = nutsedge
  RasterImage patch;
  Skeleton skeleton;
  BoundingBox box;

  long maskArea() const { return static_cast<long>(mask.cast<long>().sum()); }
};

struct BackgroundPatch {
  RasterImage patch;
  std::string source_path;
};

/// Human labels for one image. Each entry of `skeletons` pairs a skeleton
/// with the index of its enclosing box; the association is one-to-one on
/// the skeleton-labeled subset.
struct AnnotationSet {
  std::string image_path;
  int image_width = 0;
  int image_height = 0;
  std::vector<BoundingBox> boxes;
  std::vector<std::pair<int, Skeleton>> skeletons;
  std::vector<std::vector<Vec2>> polygons;
};

/// Parse a labelme-style document. rectangle -> box, polygon -> template
/// outline, line/linestrip -> skeleton segments. A skeleton is attached to
/// the smallest box containing all of its endpoints.
AnnotationSet parse_labelme(const nlohmann::json& doc);
nlohmann::json serialize_labelme(const AnnotationSet& set);

/// Rasterize the polygon interior (even-odd rule, pixel-center containment)
/// and cut the masked patch out of the image.
NutsedgeTemplate extract_template(const RasterImage& image, const std::vector<Vec2>& polygon,
                                  const Skeleton& skeleton);

struct ImageBrightness {
  std::string id;
  double mean_value = 0.0;  // mean HSV V channel, in [0,1]
};

double mean_value_channel(const RasterImage& image);

/// Bucket by brightness into equal-width bins over [0,1], then draw
/// round(fraction * |stratum|) images per stratum without replacement.
std::vector<std::string> stratified_sample(const std::vector<ImageBrightness>& images,
                                           int strata_count, double fraction, uint64_t seed);

// Template library directory layout: <name>.png (patch) + <name>.json
// (polygon, skeleton, box, row-major mask RLE starting with a zero run).
void save_template(const NutsedgeTemplate& tmpl, const std::filesystem::path& dir,
                   const std::string& name);
NutsedgeTemplate load_template(const std::filesystem::path& dir, const std::string& name);
std::vector<NutsedgeTemplate> load_template_library(const std::filesystem::path& dir);

nlohmann::json skeleton_to_json(const Skeleton& s);
Skeleton skeleton_from_json(const nlohmann::json& j);

}  // namespace nutsedge
