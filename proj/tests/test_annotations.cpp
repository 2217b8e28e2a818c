#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "nutsedge/annotations.hpp"
#include "nutsedge/rng.hpp"
#include "test_util.hpp"

using namespace nutsedge;
using nlohmann::json;

namespace {

json make_doc(json shapes) {
  return json{{"imagePath", "img.png"}, {"imageWidth", 100}, {"imageHeight", 80},
              {"shapes", std::move(shapes)}};
}

bool point_in_polygon_oracle(double px, double py, const std::vector<Vec2>& poly) {
  // independent crossing-count formulation
  int crossings = 0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if ((a.y() <= py && b.y() > py) || (b.y() <= py && a.y() > py)) {
      const double t = (py - a.y()) / (b.y() - a.y());
      if (px < a.x() + t * (b.x() - a.x())) ++crossings;
    }
  }
  return crossings % 2 == 1;
}

}  // namespace

TEST_CASE("rectangle shape becomes one box") {
  const auto set = parse_labelme(make_doc(json::array(
      {{{"label", "nutsedge"}, {"shape_type", "rectangle"}, {"points", {{10, 10}, {50, 40}}}}})));
  REQUIRE(set.boxes.size() == 1);
  CHECK(set.boxes[0] == BoundingBox{10, 10, 50, 40});
  CHECK(set.skeletons.empty());
}

TEST_CASE("linestrip with 3 points becomes a 2-segment skeleton") {
  const auto set = parse_labelme(make_doc(json::array(
      {{{"label", "nutsedge"}, {"shape_type", "rectangle"}, {"points", {{0, 0}, {60, 60}}}},
       {{"label", "skel"}, {"shape_type", "linestrip"}, {"points", {{5, 5}, {20, 10}, {40, 30}}}}})));
  REQUIRE(set.skeletons.size() == 1);
  CHECK(set.skeletons[0].first == 0);
  CHECK(set.skeletons[0].second.segments.size() == 2);
}

TEST_CASE("skeleton attaches to the smallest enclosing box") {
  const auto set = parse_labelme(make_doc(json::array(
      {{{"label", "a"}, {"shape_type", "rectangle"}, {"points", {{0, 0}, {99, 79}}}},
       {{"label", "b"}, {"shape_type", "rectangle"}, {"points", {{10, 10}, {40, 40}}}},
       {{"label", "s"}, {"shape_type", "line"}, {"points", {{15, 15}, {30, 30}}}}})));
  REQUIRE(set.skeletons.size() == 1);
  CHECK(set.skeletons[0].first == 1);
}

TEST_CASE("parse rejects bad inputs") {
  CHECK_THROWS(parse_labelme(make_doc(json::array(
      {{{"label", "x"}, {"shape_type", "circle"}, {"points", {{1, 1}, {2, 2}}}}}))));
  // polygon outside image bounds
  CHECK_THROWS(parse_labelme(make_doc(json::array(
      {{{"label", "x"}, {"shape_type", "polygon"}, {"points", {{0, 0}, {150, 0}, {10, 10}}}}}))));
  // skeleton with no enclosing box
  CHECK_THROWS(parse_labelme(make_doc(json::array(
      {{{"label", "s"}, {"shape_type", "line"}, {"points", {{15, 15}, {30, 30}}}}}))));
}

TEST_CASE("parse -> serialize -> parse is a fixed point") {
  const auto doc = make_doc(json::array(
      {{{"label", "n"}, {"shape_type", "rectangle"}, {"points", {{2, 3}, {50, 40}}}},
       {{"label", "n"}, {"shape_type", "polygon"}, {"points", {{5, 5}, {20, 5}, {12, 18}}}},
       {{"label", "s"}, {"shape_type", "linestrip"}, {"points", {{10, 10}, {20, 12}, {30, 20}}}}}));
  const auto first = parse_labelme(doc);
  const auto second = parse_labelme(serialize_labelme(first));
  CHECK(second.boxes == first.boxes);
  REQUIRE(second.skeletons.size() == first.skeletons.size());
  for (size_t i = 0; i < first.skeletons.size(); ++i) {
    CHECK(second.skeletons[i].first == first.skeletons[i].first);
    REQUIRE(second.skeletons[i].second.segments.size() == first.skeletons[i].second.segments.size());
    for (size_t k = 0; k < first.skeletons[i].second.segments.size(); ++k) {
      CHECK(second.skeletons[i].second.segments[k].a == first.skeletons[i].second.segments[k].a);
      CHECK(second.skeletons[i].second.segments[k].b == first.skeletons[i].second.segments[k].b);
    }
  }
  CHECK(second.polygons == first.polygons);
}

TEST_CASE("axis-aligned square polygon on a uniform image") {
  RasterImage img(40, 40);
  for (auto& b : img.pixels()) b = 77;
  const std::vector<Vec2> square{{9.5, 9.5}, {20.5, 9.5}, {20.5, 20.5}, {9.5, 20.5}};
  const auto tmpl = extract_template(img, square, Skeleton{{{{10, 10}, {20, 20}}}});
  CHECK(tmpl.box == BoundingBox{10, 10, 20, 20});
  CHECK(tmpl.maskArea() == 11 * 11);
  CHECK((tmpl.mask == 1).all());
  for (int v = 0; v < tmpl.patch.height(); ++v)
    for (int u = 0; u < tmpl.patch.width(); ++u) CHECK(tmpl.patch.at(u, v, 0) == 77);
}

TEST_CASE("triangle mask matches brute-force point-in-polygon oracle") {
  RasterImage img(32, 32, 50);
  const std::vector<Vec2> tri{{2.2, 3.1}, {28.7, 6.4}, {14.3, 27.9}};
  const auto tmpl = extract_template(img, tri, Skeleton{{{{14, 10}, {14, 20}}}});
  long oracle_count = 0;
  for (int v = 0; v < 32; ++v)
    for (int u = 0; u < 32; ++u)
      if (point_in_polygon_oracle(u, v, tri)) {
        ++oracle_count;
        CHECK(tmpl.box.contains(u, v));
        CHECK(tmpl.mask(v - tmpl.box.v_bottom, u - tmpl.box.u_left) == 1);
      }
  CHECK(tmpl.maskArea() == oracle_count);
}

TEST_CASE("polygon covering the full image yields full-image box") {
  RasterImage img(16, 12, 10);
  // hull strictly encloses every pixel center; raster range is clipped to the image
  const std::vector<Vec2> hull{{-0.5, -0.5}, {15.5, -0.5}, {15.5, 11.5}, {-0.5, 11.5}};
  const auto tmpl = extract_template(img, hull, Skeleton{{{{1, 1}, {10, 10}}}});
  CHECK(tmpl.box == BoundingBox{0, 0, 15, 11});
  CHECK(tmpl.maskArea() == 16 * 12);
}

TEST_CASE("extract_template rejects bad polygons and stray skeletons") {
  RasterImage img(20, 20, 10);
  CHECK_THROWS(extract_template(img, {{0, 0}, {10, 10}}, {}));  // 2 vertices
  CHECK_THROWS(extract_template(
      img, {{0, 0}, {10, 10}, {10, 0}, {0, 10}}, {}));  // bow-tie self-intersection
  CHECK_THROWS(extract_template(img, {{1, 1}, {8, 1}, {8, 8}, {1, 8}},
                                Skeleton{{{{15, 15}, {18, 18}}}}));  // skeleton outside box
}

TEST_CASE("stratified sampling counts per stratum") {
  // strata of sizes 80 and 20, fraction 0.1 -> 8 and 2
  std::vector<ImageBrightness> images;
  for (int i = 0; i < 80; ++i) images.push_back({"lo_" + std::to_string(i), 0.2});
  for (int i = 0; i < 20; ++i) images.push_back({"hi_" + std::to_string(i), 0.9});
  const auto picked = stratified_sample(images, 2, 0.1, 42);
  long lo = 0, hi = 0;
  for (const auto& id : picked) (id.starts_with("lo_") ? lo : hi)++;
  CHECK(lo == 8);
  CHECK(hi == 2);
}

TEST_CASE("fraction 1.0 returns every image") {
  std::vector<ImageBrightness> images;
  for (int i = 0; i < 17; ++i) images.push_back({std::to_string(i), i / 17.0});
  const auto picked = stratified_sample(images, 3, 1.0, 1);
  CHECK(picked.size() == images.size());
}

TEST_CASE("sampling is deterministic; seed changes selection but not counts") {
  std::vector<ImageBrightness> images;
  Rng rng(5);
  for (int i = 0; i < 100; ++i)
    images.push_back({std::to_string(i), rng.uniformReal(0.0, 1.0)});
  const auto a = stratified_sample(images, 3, 0.2, 7);
  const auto b = stratified_sample(images, 3, 0.2, 7);
  const auto c = stratified_sample(images, 3, 0.2, 8);
  CHECK(a == b);
  CHECK(a.size() == c.size());
  CHECK_THROWS(stratified_sample({}, 3, 0.1, 0));
}

TEST_CASE("template library round-trips through disk") {
  testutil::TempDir tmp("tmpl");
  RasterImage img(30, 30);
  Rng rng(9);
  for (auto& b : img.pixels()) b = static_cast<uint8_t>(rng.uniformInt(0, 255));
  const std::vector<Vec2> poly{{3.5, 2.5}, {25.5, 4.5}, {20.5, 26.5}, {5.5, 22.5}};
  const auto tmpl = extract_template(img, poly, Skeleton{{{{6, 6}, {20, 20}}, {{8, 18}, {18, 8}}}});
  save_template(tmpl, tmp.path, "t0");
  const auto lib = load_template_library(tmp.path);
  REQUIRE(lib.size() == 1);
  CHECK(lib[0].box == tmpl.box);
  CHECK((lib[0].mask == tmpl.mask).all());
  CHECK(lib[0].patch == tmpl.patch);
  CHECK(lib[0].skeleton.segments.size() == 2);
}
