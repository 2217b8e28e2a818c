#include "nutsedge/config.hpp"

#include <fstream>
#include <sstream>

namespace nutsedge {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

void PipelineConfig::validate() const {
  composeConfig().validate();
  require(sigma > 0.0, "config: sigma must be > 0");
  require(strata_count >= 1, "config: strata_count must be >= 1");
  require(neighborhood >= 3 && neighborhood % 2 == 1, "config: neighborhood must be odd and >= 3");
  require(epsilon >= 0.0, "config: epsilon must be >= 0");
  require(threshold_t > 0.0 && threshold_t < 1.0, "config: threshold_t must be in (0,1)");
  require(corr_dist_d > 0.0, "config: corr_dist_d must be > 0");
}

ComposeConfig PipelineConfig::composeConfig() const {
  return ComposeConfig{density_min, density_max, brightness_min, brightness_max, seed, count};
}

SynthParams PipelineConfig::synthParams(int width, int height, uint64_t stage_seed) const {
  return SynthParams{neighborhood, epsilon, width, height, stage_seed};
}

NspmParams PipelineConfig::nspmParams() const { return NspmParams{sigma}; }

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config: expected key=value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "density_min") cfg.density_min = std::stod(value);
      else if (key == "density_max") cfg.density_max = std::stod(value);
      else if (key == "brightness_min") cfg.brightness_min = std::stod(value);
      else if (key == "brightness_max") cfg.brightness_max = std::stod(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "count") cfg.count = std::stoi(value);
      else if (key == "sigma") cfg.sigma = std::stod(value);
      else if (key == "strata_count") cfg.strata_count = std::stoi(value);
      else if (key == "neighborhood") cfg.neighborhood = std::stoi(value);
      else if (key == "epsilon") cfg.epsilon = std::stod(value);
      else if (key == "threshold_t") cfg.threshold_t = std::stod(value);
      else if (key == "corr_dist_d") cfg.corr_dist_d = std::stod(value);
      else throw std::invalid_argument("config: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("config: bad value for '" + key + "': " + value);
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const PipelineConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "density_min = " << cfg.density_min << "\n"
      << "density_max = " << cfg.density_max << "\n"
      << "brightness_min = " << cfg.brightness_min << "\n"
      << "brightness_max = " << cfg.brightness_max << "\n"
      << "seed = " << cfg.seed << "\n"
      << "count = " << cfg.count << "\n"
      << "sigma = " << cfg.sigma << "\n"
      << "strata_count = " << cfg.strata_count << "\n"
      << "neighborhood = " << cfg.neighborhood << "\n"
      << "epsilon = " << cfg.epsilon << "\n"
      << "threshold_t = " << cfg.threshold_t << "\n"
      << "corr_dist_d = " << cfg.corr_dist_d << "\n";
  return out.str();
}

}  // namespace nutsedge
