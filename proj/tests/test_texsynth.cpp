#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <set>

#include "nutsedge/rng.hpp"
#include "nutsedge/texsynth.hpp"

using namespace nutsedge;

namespace {

BackgroundPatch noise_patch(int w, int h, uint64_t seed) {
  RasterImage img(w, h);
  Rng rng(seed);
  for (auto& b : img.pixels()) b = static_cast<uint8_t>(rng.uniformInt(0, 255));
  return {img, "noise"};
}

BackgroundPatch stripe_patch(int w, int h, int period) {
  RasterImage img(w, h);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      // distinct color per column-in-period so one neighbor pins the phase
      const uint8_t val = static_cast<uint8_t>(30 + 50 * (u % period));
      img.at(u, v, 0) = val;
      img.at(u, v, 1) = static_cast<uint8_t>(255 - val);
      img.at(u, v, 2) = val;
    }
  return {img, "stripes"};
}

}  // namespace

TEST_CASE("single uniform patch synthesizes a uniform image") {
  RasterImage uni(12, 12);
  for (auto& b : uni.pixels()) b = 123;
  const SynthParams params{5, 0.1, 20, 20, 3};
  const RasterImage out = synthesize_background({{uni, "uni"}}, params);
  for (const auto b : out.pixels()) CHECK(b == 123);
}

TEST_CASE("identical params give identical output bytes") {
  const auto patch = noise_patch(14, 14, 2);
  const SynthParams params{7, 0.1, 24, 24, 99};
  const auto a = synthesize_background({patch}, params);
  const auto b = synthesize_background({patch}, params);
  CHECK(a == b);
  SynthParams other = params;
  other.seed = 100;
  CHECK(synthesize_background({patch}, other) != a);
}

TEST_CASE("every output color occurs in some source patch") {
  const auto p1 = noise_patch(12, 12, 4);
  const auto p2 = stripe_patch(12, 12, 3);
  std::set<std::array<uint8_t, 3>> palette;
  for (const auto& p : {p1, p2})
    for (int v = 0; v < p.patch.height(); ++v)
      for (int u = 0; u < p.patch.width(); ++u)
        palette.insert({p.patch.at(u, v, 0), p.patch.at(u, v, 1), p.patch.at(u, v, 2)});
  const SynthParams params{5, 0.2, 30, 30, 17};
  const auto out = synthesize_background({p1, p2}, params);
  for (int v = 0; v < out.height(); ++v)
    for (int u = 0; u < out.width(); ++u)
      CHECK(palette.count({out.at(u, v, 0), out.at(u, v, 1), out.at(u, v, 2)}) == 1);
}

TEST_CASE("stripe source with eps 0: output neighborhoods occur verbatim in source") {
  const auto patch = stripe_patch(16, 16, 4);
  const SynthParams params{5, 0.0, 24, 24, 5};
  const auto out = synthesize_background({patch}, params);
  // scan all full 3x3 output windows against the set of source 3x3 windows
  const auto window_key = [](const RasterImage& img, int cu, int cv) {
    std::array<uint8_t, 27> key{};
    int i = 0;
    for (int dv = -1; dv <= 1; ++dv)
      for (int du = -1; du <= 1; ++du)
        for (int c = 0; c < 3; ++c) key[i++] = img.at(cu + du, cv + dv, c);
    return key;
  };
  std::set<std::array<uint8_t, 27>> source_windows;
  for (int v = 1; v < patch.patch.height() - 1; ++v)
    for (int u = 1; u < patch.patch.width() - 1; ++u)
      source_windows.insert(window_key(patch.patch, u, v));
  long misses = 0;
  for (int v = 1; v < out.height() - 1; ++v)
    for (int u = 1; u < out.width() - 1; ++u)
      misses += source_windows.count(window_key(out, u, v)) == 0;
  CHECK(misses == 0);
}

TEST_CASE("verify_synthesis accepts self-produced output and flags tampering") {
  const auto patch = noise_patch(12, 12, 8);
  const SynthParams params{5, 0.1, 18, 18, 21};
  auto out = synthesize_background({patch}, params);
  CHECK(verify_synthesis({patch}, out, params).violations.empty());

  // flip one grown pixel to a color very unlike its neighborhood
  out.at(1, 1, 0) ^= 0x80;
  out.at(1, 1, 1) ^= 0x80;
  out.at(1, 1, 2) ^= 0x80;
  CHECK(!verify_synthesis({patch}, out, params).violations.empty());
}

TEST_CASE("infinite tolerance admits everything") {
  const auto patch = noise_patch(10, 10, 31);
  SynthParams params{5, 0.1, 16, 16, 2};
  auto out = synthesize_background({patch}, params);
  // scramble grown pixels with other source colors; eps=inf must accept
  out.at(0, 0, 0) = patch.patch.at(3, 3, 0);
  out.at(0, 0, 1) = patch.patch.at(3, 3, 1);
  out.at(0, 0, 2) = patch.patch.at(3, 3, 2);
  params.epsilon = std::numeric_limits<double>::infinity();
  CHECK(verify_synthesis({patch}, out, params).violations.empty());
}

TEST_CASE("parameter validation") {
  const auto patch = noise_patch(10, 10, 1);
  CHECK_THROWS(synthesize_background({}, SynthParams{5, 0.1, 10, 10, 0}));
  CHECK_THROWS(synthesize_background({patch}, SynthParams{4, 0.1, 10, 10, 0}));  // even window
  CHECK_THROWS(synthesize_background({patch}, SynthParams{5, 0.1, 0, 10, 0}));   // zero area
  CHECK_THROWS(synthesize_background({{RasterImage(2, 2), "tiny"}}, SynthParams{5, 0.1, 8, 8, 0}));
}

TEST_CASE("runtime roughly linear in output pixel count at fixed window") {
  const auto patch = noise_patch(16, 16, 12);
  const auto time_one = [&](int side) {
    const SynthParams params{9, 0.1, side, side, 5};
    const auto start = std::chrono::steady_clock::now();
    synthesize_background({patch}, params);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  time_one(24);  // warm-up
  const double t1 = time_one(24);
  const double t2 = time_one(48);
  // grown pixel count ratio: (48^2 - 81) / (24^2 - 81) ~ 4.5; allow 2x slack
  const double grown_ratio = (48.0 * 48 - 81) / (24.0 * 24 - 81);
  CHECK(t2 / t1 > grown_ratio / 2.5);
  CHECK(t2 / t1 < grown_ratio * 2.5);
}
