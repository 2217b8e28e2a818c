#include "nutsedge/annotations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "nutsedge/image_io.hpp"
#include "nutsedge/rng.hpp"

namespace nutsedge {
namespace {

using nlohmann::json;

Vec2 read_point(const json& p) {
  if (!p.is_array() || p.size() != 2) throw std::invalid_argument("parse_labelme: bad point");
  return Vec2(p[0].get<double>(), p[1].get<double>());
}

void check_in_image(const Vec2& p, int width, int height) {
  if (p.x() < 0.0 || p.x() > width - 1 || p.y() < 0.0 || p.y() > height - 1)
    throw std::invalid_argument("parse_labelme: coordinate outside image bounds");
}

bool point_in_polygon(double px, double py, const std::vector<Vec2>& poly) {
  bool inside = false;
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const double yi = poly[i].y(), yj = poly[j].y();
    if ((yi > py) != (yj > py)) {
      const double xint = poly[i].x() + (py - yi) * (poly[j].x() - poly[i].x()) / (yj - yi);
      if (px < xint) inside = !inside;
    }
  }
  return inside;
}

int orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double cross = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  if (cross > 1e-12) return 1;
  if (cross < -1e-12) return -1;
  return 0;
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const int o1 = orient(a, b, c), o2 = orient(a, b, d);
  const int o3 = orient(c, d, a), o4 = orient(c, d, b);
  return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

bool polygon_self_intersects(const std::vector<Vec2>& poly) {
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      // skip adjacent edges (shared vertex)
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return true;
    }
  return false;
}

/// Smallest-area box containing every endpoint, or -1.
int enclosing_box(const std::vector<BoundingBox>& boxes, const std::vector<LineSegment>& segs) {
  int best = -1;
  long best_area = 0;
  for (size_t i = 0; i < boxes.size(); ++i) {
    bool ok = true;
    for (const auto& s : segs) {
      const auto in = [&](const Vec2& p) {
        return boxes[i].contains(static_cast<int>(std::lround(p.x())),
                                 static_cast<int>(std::lround(p.y())));
      };
      if (!in(s.a) || !in(s.b)) { ok = false; break; }
    }
    if (ok && (best < 0 || boxes[i].area() < best_area)) {
      best = static_cast<int>(i);
      best_area = boxes[i].area();
    }
  }
  return best;
}

std::vector<int> rle_encode(const Grid<uint8_t>& mask) {
  std::vector<int> runs;
  uint8_t current = 0;  // runs alternate starting with zeros
  int count = 0;
  for (Eigen::Index v = 0; v < mask.rows(); ++v)
    for (Eigen::Index u = 0; u < mask.cols(); ++u) {
      const uint8_t bit = mask(v, u) ? 1 : 0;
      if (bit == current) {
        ++count;
      } else {
        runs.push_back(count);
        current = bit;
        count = 1;
      }
    }
  runs.push_back(count);
  return runs;
}

Grid<uint8_t> rle_decode(const std::vector<int>& runs, int width, int height) {
  Grid<uint8_t> mask(height, width);
  Eigen::Index pos = 0;
  uint8_t current = 0;
  for (int run : runs) {
    if (run < 0 || pos + run > mask.size()) throw std::runtime_error("template: bad mask RLE");
    for (int i = 0; i < run; ++i) {
      mask(pos / width, pos % width) = current;
      ++pos;
    }
    current = 1 - current;
  }
  if (pos != mask.size()) throw std::runtime_error("template: mask RLE length mismatch");
  return mask;
}

}  // namespace

AnnotationSet parse_labelme(const json& doc) {
  AnnotationSet set;
  set.image_path = doc.value("imagePath", "");
  set.image_width = doc.at("imageWidth").get<int>();
  set.image_height = doc.at("imageHeight").get<int>();
  require(set.image_width >= 1 && set.image_height >= 1, "parse_labelme: bad image dims");

  std::vector<std::vector<LineSegment>> segment_shapes;
  for (const auto& shape : doc.at("shapes")) {
    const std::string type = shape.at("shape_type").get<std::string>();
    const auto& pts = shape.at("points");
    std::vector<Vec2> points;
    points.reserve(pts.size());
    for (const auto& p : pts) {
      const Vec2 q = read_point(p);
      check_in_image(q, set.image_width, set.image_height);
      points.push_back(q);
    }
    if (type == "rectangle") {
      if (points.size() != 2) throw std::invalid_argument("parse_labelme: rectangle needs 2 points");
      BoundingBox box;
      box.u_left = static_cast<int>(std::lround(std::min(points[0].x(), points[1].x())));
      box.u_right = static_cast<int>(std::lround(std::max(points[0].x(), points[1].x())));
      box.v_bottom = static_cast<int>(std::lround(std::min(points[0].y(), points[1].y())));
      box.v_top = static_cast<int>(std::lround(std::max(points[0].y(), points[1].y())));
      set.boxes.push_back(box);
    } else if (type == "polygon") {
      if (points.size() < 3) throw std::invalid_argument("parse_labelme: polygon needs >= 3 points");
      set.polygons.push_back(std::move(points));
    } else if (type == "line" || type == "linestrip") {
      if (points.size() < 2) throw std::invalid_argument("parse_labelme: line needs >= 2 points");
      std::vector<LineSegment> segs;
      for (size_t i = 0; i + 1 < points.size(); ++i)
        segs.push_back({points[i], points[i + 1]});
      segment_shapes.push_back(std::move(segs));
    } else {
      throw std::invalid_argument("parse_labelme: unsupported shape_type '" + type + "'");
    }
  }

  // All segment shapes sharing an enclosing box form one skeleton.
  std::map<int, Skeleton> by_box;
  for (auto& segs : segment_shapes) {
    const int box = enclosing_box(set.boxes, segs);
    if (box < 0) throw std::invalid_argument("parse_labelme: skeleton with no enclosing box");
    auto& sk = by_box[box];
    sk.segments.insert(sk.segments.end(), segs.begin(), segs.end());
  }
  for (auto& [box, sk] : by_box) set.skeletons.emplace_back(box, std::move(sk));
  return set;
}

json serialize_labelme(const AnnotationSet& set) {
  json shapes = json::array();
  for (const auto& box : set.boxes) {
    shapes.push_back({{"label", "nutsedge"},
                      {"shape_type", "rectangle"},
                      {"points", {{box.u_left, box.v_bottom}, {box.u_right, box.v_top}}}});
  }
  for (const auto& poly : set.polygons) {
    json pts = json::array();
    for (const auto& p : poly) pts.push_back({p.x(), p.y()});
    shapes.push_back({{"label", "nutsedge"}, {"shape_type", "polygon"}, {"points", pts}});
  }
  for (const auto& [box, sk] : set.skeletons) {
    for (const auto& seg : sk.segments) {
      shapes.push_back({{"label", "skeleton"},
                        {"shape_type", "line"},
                        {"points", {{seg.a.x(), seg.a.y()}, {seg.b.x(), seg.b.y()}}}});
    }
  }
  return json{{"imagePath", set.image_path},
              {"imageWidth", set.image_width},
              {"imageHeight", set.image_height},
              {"shapes", shapes}};
}

NutsedgeTemplate extract_template(const RasterImage& image, const std::vector<Vec2>& polygon,
                                  const Skeleton& skeleton) {
  require(polygon.size() >= 3, "extract_template: polygon needs >= 3 vertices");
  if (polygon_self_intersects(polygon))
    throw std::invalid_argument("extract_template: self-intersecting polygon");

  double xmin = polygon[0].x(), xmax = xmin, ymin = polygon[0].y(), ymax = ymin;
  for (const auto& p : polygon) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  const int u0 = std::max(0, static_cast<int>(std::floor(xmin)));
  const int u1 = std::min(image.width() - 1, static_cast<int>(std::ceil(xmax)));
  const int v0 = std::max(0, static_cast<int>(std::floor(ymin)));
  const int v1 = std::min(image.height() - 1, static_cast<int>(std::ceil(ymax)));

  std::vector<PixelPoint> support;
  for (int v = v0; v <= v1; ++v)
    for (int u = u0; u <= u1; ++u)
      if (point_in_polygon(u, v, polygon)) support.push_back({u, v});
  require(!support.empty(), "extract_template: polygon covers no pixel centers");

  NutsedgeTemplate tmpl;
  tmpl.polygon = polygon;
  tmpl.skeleton = skeleton;
  tmpl.box = bbox_of_pixels(support);
  tmpl.mask = Grid<uint8_t>::Zero(tmpl.box.height(), tmpl.box.width());
  tmpl.patch = RasterImage(tmpl.box.width(), tmpl.box.height());
  for (const auto& p : support) {
    const int lu = p.u - tmpl.box.u_left, lv = p.v - tmpl.box.v_bottom;
    tmpl.mask(lv, lu) = 1;
    for (int c = 0; c < 3; ++c) tmpl.patch.at(lu, lv, c) = image.at(p.u, p.v, c);
  }
  for (const auto& seg : skeleton.segments) {
    const auto inside = [&](const Vec2& p) {
      return tmpl.box.contains(static_cast<int>(std::lround(p.x())),
                               static_cast<int>(std::lround(p.y())));
    };
    if (!inside(seg.a) || !inside(seg.b))
      throw std::invalid_argument("extract_template: skeleton endpoint outside polygon box");
  }
  return tmpl;
}

double mean_value_channel(const RasterImage& image) {
  double sum = 0.0;
  for (int v = 0; v < image.height(); ++v)
    for (int u = 0; u < image.width(); ++u)
      sum += std::max({image.at(u, v, 0), image.at(u, v, 1), image.at(u, v, 2)}) / 255.0;
  return sum / (static_cast<double>(image.width()) * image.height());
}

std::vector<std::string> stratified_sample(const std::vector<ImageBrightness>& images,
                                           int strata_count, double fraction, uint64_t seed) {
  require(!images.empty(), "stratified_sample: empty image list");
  require(strata_count >= 1, "stratified_sample: strata_count must be >= 1");
  require(fraction > 0.0 && fraction <= 1.0, "stratified_sample: fraction must be in (0,1]");

  std::vector<std::vector<size_t>> strata(strata_count);
  for (size_t i = 0; i < images.size(); ++i) {
    const double v = std::clamp(images[i].mean_value, 0.0, 1.0);
    const int bin = std::min(strata_count - 1, static_cast<int>(v * strata_count));
    strata[bin].push_back(i);
  }

  Rng rng(seed);
  std::vector<std::string> out;
  for (auto& stratum : strata) {
    const auto take = static_cast<size_t>(std::llround(fraction * stratum.size()));
    // partial Fisher-Yates: draw without replacement
    for (size_t k = 0; k < take; ++k) {
      const auto j = static_cast<size_t>(rng.uniformInt(static_cast<int64_t>(k),
                                                        static_cast<int64_t>(stratum.size()) - 1));
      std::swap(stratum[k], stratum[j]);
      out.push_back(images[stratum[k]].id);
    }
  }
  return out;
}

json skeleton_to_json(const Skeleton& s) {
  json segs = json::array();
  for (const auto& seg : s.segments)
    segs.push_back({{seg.a.x(), seg.a.y()}, {seg.b.x(), seg.b.y()}});
  return json{{"segments", segs}};
}

Skeleton skeleton_from_json(const json& j) {
  Skeleton s;
  for (const auto& seg : j.at("segments"))
    s.segments.push_back({read_point(seg.at(0)), read_point(seg.at(1))});
  return s;
}

void save_template(const NutsedgeTemplate& tmpl, const std::filesystem::path& dir,
                   const std::string& name) {
  std::filesystem::create_directories(dir);
  save_png(tmpl.patch, dir / (name + ".png"));
  json poly = json::array();
  for (const auto& p : tmpl.polygon) poly.push_back({p.x(), p.y()});
  const json doc{{"polygon", poly},
                 {"skeleton", skeleton_to_json(tmpl.skeleton)},
                 {"box", {tmpl.box.u_left, tmpl.box.v_bottom, tmpl.box.u_right, tmpl.box.v_top}},
                 {"mask_width", tmpl.box.width()},
                 {"mask_height", tmpl.box.height()},
                 {"mask_rle", rle_encode(tmpl.mask)}};
  std::ofstream out(dir / (name + ".json"));
  out << doc.dump(2) << "\n";
}

NutsedgeTemplate load_template(const std::filesystem::path& dir, const std::string& name) {
  std::ifstream in(dir / (name + ".json"));
  if (!in) throw std::runtime_error("load_template: missing sidecar for " + name);
  json doc = json::parse(in);

  NutsedgeTemplate tmpl;
  for (const auto& p : doc.at("polygon")) tmpl.polygon.push_back(read_point(p));
  tmpl.skeleton = skeleton_from_json(doc.at("skeleton"));
  const auto& b = doc.at("box");
  tmpl.box = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
  tmpl.mask = rle_decode(doc.at("mask_rle").get<std::vector<int>>(),
                         doc.at("mask_width").get<int>(), doc.at("mask_height").get<int>());
  tmpl.patch = load_png(dir / (name + ".png"));
  if (tmpl.patch.width() != tmpl.box.width() || tmpl.patch.height() != tmpl.box.height())
    throw std::runtime_error("load_template: patch/box dimension mismatch for " + name);
  return tmpl;
}

std::vector<NutsedgeTemplate> load_template_library(const std::filesystem::path& dir) {
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
  std::sort(names.begin(), names.end());
  std::vector<NutsedgeTemplate> library;
  library.reserve(names.size());
  for (const auto& name : names) library.push_back(load_template(dir, name));
  return library;
}

}  // namespace nutsedge
