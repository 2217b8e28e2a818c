#pragma once

#include <filesystem>
#include <string>

#include "nutsedge/compose.hpp"
#include "nutsedge/nspm.hpp"
#include "nutsedge/skeldecode.hpp"
#include "nutsedge/texsynth.hpp"

namespace nutsedge {

/// Flat key=value config shared by every pipeline stage. Unknown keys are
/// rejected; serialization round-trips to the identical normalized text.
struct PipelineConfig {
  double density_min = 5.0;
  double density_max = 10.0;
  double brightness_min = 0.8;
  double brightness_max = 1.2;
  uint64_t seed = 0;
  int count = 1;           // images to generate
  double sigma = 12.0;     // NSPM Gaussian scale
  int strata_count = 3;    // lighting strata
  int neighborhood = 25;   // texture synthesis window side (odd)
  double epsilon = 0.1;    // synthesis candidate tolerance
  double threshold_t = 0.5;   // probability threshold for I_S / I_o
  double corr_dist_d = 12.0;  // skeleton correspondence distance

  void validate() const;
  ComposeConfig composeConfig() const;
  SynthParams synthParams(int width, int height, uint64_t stage_seed) const;
  NspmParams nspmParams() const;
};

PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const PipelineConfig& cfg);

}  // namespace nutsedge
