#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "nutsedge/compose.hpp"
#include "nutsedge/rng.hpp"

using namespace nutsedge;

namespace {

NutsedgeTemplate square_template(int side, uint8_t r, uint8_t g, uint8_t b) {
  NutsedgeTemplate tmpl;
  tmpl.box = {0, 0, side - 1, side - 1};
  tmpl.mask = Grid<uint8_t>::Constant(side, side, 1);
  tmpl.patch = RasterImage(side, side);
  for (int v = 0; v < side; ++v)
    for (int u = 0; u < side; ++u) {
      tmpl.patch.at(u, v, 0) = r;
      tmpl.patch.at(u, v, 1) = g;
      tmpl.patch.at(u, v, 2) = b;
    }
  tmpl.polygon = {{0, 0}, {side - 1.0, 0}, {side - 1.0, side - 1.0}, {0, side - 1.0}};
  tmpl.skeleton.segments = {{{1, 1}, {side - 2.0, side - 2.0}}};
  return tmpl;
}

}  // namespace

TEST_CASE("rigid_transform identity and involution") {
  const Vec2 p(3.5, -2.0);
  CHECK((rigid_transform(p, 0.0, 0.0, 0.0) - p).norm() == doctest::Approx(0.0));
  const Vec2 twice = rigid_transform(rigid_transform(p, std::numbers::pi, 0, 0), std::numbers::pi, 0, 0);
  CHECK((twice - p).norm() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("rigid_transform matches the direct matrix product") {
  // (1,0) under theta=pi/2: [cos sin; -sin cos] * (1,0) = (0,-1)
  const Vec2 q = rigid_transform(Vec2(1, 0), std::numbers::pi / 2, 0, 0);
  CHECK(q.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(q.y() == doctest::Approx(-1.0).epsilon(1e-12));

  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const double theta = rng.uniformReal(0, 2 * std::numbers::pi);
    const double tx = rng.uniformReal(-10, 10), ty = rng.uniformReal(-10, 10);
    const Vec2 p(rng.uniformReal(-5, 5), rng.uniformReal(-5, 5));
    Eigen::Matrix3d m;
    m << std::cos(theta), std::sin(theta), tx, -std::sin(theta), std::cos(theta), ty, 0, 0, 1;
    const Eigen::Vector3d expect = m * Eigen::Vector3d(p.x(), p.y(), 1.0);
    const Vec2 got = rigid_transform(p, theta, tx, ty);
    CHECK(got.x() == doctest::Approx(expect.x()).epsilon(1e-12));
    CHECK(got.y() == doctest::Approx(expect.y()).epsilon(1e-12));
  }
}

TEST_CASE("instance count follows the density range") {
  const RasterImage bg(1000, 1000, 60);
  const std::vector<NutsedgeTemplate> lib{square_template(21, 200, 30, 30)};
  ComposeConfig cfg;
  cfg.brightness_min = cfg.brightness_max = 1.0;
  for (uint64_t seed = 0; seed < 25; ++seed) {
    const auto result = compose_image(bg, lib, cfg, seed);
    CHECK(result.instances.size() >= 5);
    CHECK(result.instances.size() <= 10);
  }
}

TEST_CASE("determinism: identical seeds give byte-identical results") {
  const RasterImage bg(300, 200, 80);
  const std::vector<NutsedgeTemplate> lib{square_template(15, 180, 60, 20),
                                          square_template(9, 20, 180, 60)};
  ComposeConfig cfg;
  cfg.density_min = 60;
  cfg.density_max = 120;
  const auto a = compose_image(bg, lib, cfg, 123);
  const auto b = compose_image(bg, lib, cfg, 123);
  CHECK(a.image == b.image);
  CHECK(a.brightness_factor == b.brightness_factor);
  CHECK(compose_image(bg, lib, cfg, 124).image != a.image);
}

TEST_CASE("brightness 1.0 leaves composited pixels untouched") {
  const RasterImage bg(200, 200, 90);
  const std::vector<NutsedgeTemplate> lib{square_template(11, 200, 100, 50)};
  ComposeConfig cfg;
  cfg.density_min = 80;
  cfg.density_max = 150;
  cfg.brightness_min = cfg.brightness_max = 1.0;
  const auto result = compose_image(bg, lib, cfg, 5);
  for (const auto& inst : result.instances)
    for (size_t k = 0; k < inst.mask_support.size(); ++k) {
      const auto& dst = inst.mask_support[k];
      // a later instance may overwrite; only check the topmost owner
      bool topmost = true;
      for (const auto& other : result.instances)
        if (&other > &inst)
          for (const auto& p : other.mask_support)
            if (p == dst) topmost = false;
      if (!topmost) continue;
      const auto& src = inst.provenance[k];
      const auto& tmpl = lib[inst.template_id];
      CHECK(result.image.at(dst.u, dst.v, 0) == tmpl.patch.at(src.u, src.v, 0));
      CHECK(result.image.at(dst.u, dst.v, 1) == tmpl.patch.at(src.u, src.v, 1));
      CHECK(result.image.at(dst.u, dst.v, 2) == tmpl.patch.at(src.u, src.v, 2));
    }
}

TEST_CASE("provenance maps every mask pixel to exactly one in-bounds template pixel") {
  const RasterImage bg(250, 180, 70);
  const std::vector<NutsedgeTemplate> lib{square_template(17, 150, 90, 40)};
  ComposeConfig cfg77;
  cfg77.density_min = 80;
  cfg77.density_max = 160;
  const auto result = compose_image(bg, lib, cfg77, 77);
  REQUIRE(!result.instances.empty());
  for (const auto& inst : result.instances) {
    REQUIRE(inst.provenance.size() == inst.mask_support.size());
    const auto& tmpl = lib[inst.template_id];
    std::set<std::pair<int, int>> seen_out;
    for (size_t k = 0; k < inst.mask_support.size(); ++k) {
      const auto& dst = inst.mask_support[k];
      const auto& src = inst.provenance[k];
      CHECK(bg.inBounds(dst.u, dst.v));
      CHECK(inst.box.contains(dst));
      CHECK(src.u >= 0);
      CHECK(src.u < tmpl.box.width());
      CHECK(src.v >= 0);
      CHECK(src.v < tmpl.box.height());
      CHECK(tmpl.mask(src.v, src.u) == 1);
      CHECK(seen_out.insert({dst.u, dst.v}).second);  // one source per output pixel
    }
  }
}

TEST_CASE("box bounds skeleton and equals bbox of transformed support") {
  const RasterImage bg(300, 300, 65);
  const std::vector<NutsedgeTemplate> lib{square_template(25, 120, 120, 40)};
  ComposeConfig cfg31;
  cfg31.density_min = 40;
  cfg31.density_max = 90;
  const auto result = compose_image(bg, lib, cfg31, 31);
  for (const auto& inst : result.instances) {
    CHECK(inst.box == bbox_of_pixels(inst.mask_support));
    for (const auto& seg : inst.skeleton.segments) {
      // pre-clip: endpoints within the recomputed box up to NN rounding slack
      for (const Vec2& e : {seg.a, seg.b}) {
        CHECK(e.x() >= inst.box.u_left - 1.5);
        CHECK(e.x() <= inst.box.u_right + 1.5);
        CHECK(e.y() >= inst.box.v_bottom - 1.5);
        CHECK(e.y() <= inst.box.v_top + 1.5);
      }
    }
  }
}

TEST_CASE("brightness jitter scales channels uniformly per pixel") {
  const RasterImage bg(120, 120, 100);
  const std::vector<NutsedgeTemplate> lib{square_template(9, 210, 140, 70)};
  ComposeConfig cfg;
  cfg.density_min = 150;
  cfg.density_max = 250;
  cfg.brightness_min = cfg.brightness_max = 1.15;
  const auto jittered = compose_image(bg, lib, cfg, 9);
  cfg.brightness_min = cfg.brightness_max = 1.0;
  const auto plain = compose_image(bg, lib, cfg, 9);
  REQUIRE(jittered.instances.size() == plain.instances.size());
  for (int v = 0; v < bg.height(); ++v)
    for (int u = 0; u < bg.width(); ++u) {
      const int value = std::max({plain.image.at(u, v, 0), plain.image.at(u, v, 1),
                                  plain.image.at(u, v, 2)});
      const double target = std::min(255.0, value * 1.15);
      const double scale = target / value;
      for (int c = 0; c < 3; ++c) {
        const double expect = std::min(255.0, std::round(plain.image.at(u, v, c) * scale));
        CHECK(jittered.image.at(u, v, c) == static_cast<uint8_t>(expect));
      }
    }
}

TEST_CASE("config validation and error paths") {
  ComposeConfig bad;
  bad.density_min = 10;
  bad.density_max = 5;
  CHECK_THROWS(bad.validate());
  const RasterImage bg(50, 50, 10);
  CHECK_THROWS(compose_image(bg, {}, ComposeConfig{}, 0));  // empty library
  CHECK_THROWS(compose_image(bg, {square_template(60, 1, 2, 3)}, ComposeConfig{}, 0));
}

TEST_CASE("export_coco structure and inclusive bbox widths") {
  PlacedInstance inst;
  inst.box = {10, 20, 30, 50};
  inst.mask_support = {{10, 20}};
  inst.polygon = {{10, 20}, {30, 20}, {30, 50}};
  inst.skeleton.segments = {{{12, 22}, {28, 48}}};
  const auto doc = export_coco({{CocoImageRecord{1, "img_000.png", 100, 100}, {inst}}});
  CHECK(doc.at("images").size() == 1);
  CHECK(doc.at("annotations").size() == 1);
  CHECK(doc.at("categories").size() == 1);
  CHECK(doc.at("categories")[0].at("name") == "nutsedge");
  const auto& bbox = doc.at("annotations")[0].at("bbox");
  CHECK(bbox[0] == 10);
  CHECK(bbox[1] == 20);
  CHECK(bbox[2] == 21);  // u_right - u_left + 1
  CHECK(bbox[3] == 31);
  CHECK(doc.at("annotations")[0].contains("skeleton"));

  const auto empty = export_coco({});
  CHECK(empty.at("images").empty());
  CHECK(empty.at("annotations").empty());

  CHECK_THROWS(export_coco({{CocoImageRecord{1, "a", 10, 10}, {}},
                            {CocoImageRecord{1, "b", 10, 10}, {}}}));
}
