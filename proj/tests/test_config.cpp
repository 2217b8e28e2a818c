#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "nutsedge/config.hpp"
#include "test_util.hpp"

using namespace nutsedge;

TEST_CASE("defaults validate and carry the documented values") {
  PipelineConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.density_min == 5.0);
  CHECK(cfg.density_max == 10.0);
  CHECK(cfg.brightness_min == 0.8);
  CHECK(cfg.brightness_max == 1.2);
  CHECK(cfg.sigma == 12.0);
  CHECK(cfg.strata_count == 3);
  CHECK(cfg.neighborhood == 25);
  CHECK(cfg.epsilon == 0.1);
  CHECK(cfg.threshold_t == 0.5);
  CHECK(cfg.corr_dist_d == 12.0);
}

TEST_CASE("parsing tolerates comments, blank lines and spacing") {
  const PipelineConfig cfg = parse_config(
      "# pipeline settings\n"
      "\n"
      "density_min=6\n"
      "  density_max =  8  # inline comment\n"
      "seed = 99\n");
  CHECK(cfg.density_min == 6.0);
  CHECK(cfg.density_max == 8.0);
  CHECK(cfg.seed == 99);
  CHECK(cfg.count == 1);  // untouched default
}

TEST_CASE("serialization round-trips to identical normalized text") {
  PipelineConfig cfg;
  cfg.density_min = 6.5;
  cfg.seed = 1234;
  cfg.epsilon = 0.25;
  const std::string text = serialize_config(cfg);
  const PipelineConfig back = parse_config(text);
  CHECK(serialize_config(back) == text);
}

TEST_CASE("unknown keys and malformed lines are rejected") {
  CHECK_THROWS(parse_config("densty_min = 5\n"));
  CHECK_THROWS(parse_config("density_min 5\n"));
  CHECK_THROWS(parse_config("density_min = abc\n"));
}

TEST_CASE("validation rejects inconsistent settings") {
  CHECK_THROWS(parse_config("density_min = 10\ndensity_max = 5\n"));
  CHECK_THROWS(parse_config("brightness_min = 0\n"));
  CHECK_THROWS(parse_config("sigma = 0\n"));
  CHECK_THROWS(parse_config("neighborhood = 24\n"));  // must be odd
  CHECK_THROWS(parse_config("neighborhood = 1\n"));
  CHECK_THROWS(parse_config("epsilon = -0.1\n"));
  CHECK_THROWS(parse_config("threshold_t = 1.0\n"));
  CHECK_THROWS(parse_config("corr_dist_d = 0\n"));
  CHECK_THROWS(parse_config("strata_count = 0\n"));
}

TEST_CASE("load_config reads a file and fails on missing paths") {
  testutil::TempDir tmp("config");
  std::ofstream(tmp.path / "p.cfg") << "sigma = 9\ncount = 4\n";
  const PipelineConfig cfg = load_config(tmp.path / "p.cfg");
  CHECK(cfg.sigma == 9.0);
  CHECK(cfg.count == 4);
  CHECK_THROWS(load_config(tmp.path / "absent.cfg"));
}

TEST_CASE("stage adapters forward the matching fields") {
  PipelineConfig cfg;
  cfg.seed = 7;
  cfg.count = 3;
  cfg.sigma = 10.0;

  const ComposeConfig cc = cfg.composeConfig();
  CHECK(cc.density_min == cfg.density_min);
  CHECK(cc.brightness_max == cfg.brightness_max);
  CHECK(cc.seed == 7);
  CHECK(cc.images_to_generate == 3);

  const SynthParams sp = cfg.synthParams(128, 96, 42);
  CHECK(sp.neighborhood == cfg.neighborhood);
  CHECK(sp.epsilon == cfg.epsilon);
  CHECK(sp.out_width == 128);
  CHECK(sp.out_height == 96);
  CHECK(sp.seed == 42);

  CHECK(cfg.nspmParams().sigma == 10.0);
}
