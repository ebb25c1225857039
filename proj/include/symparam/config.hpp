#pragma once

// Experiment configuration stored as a JSON document. Missing keys keep
// their defaults; unknown keys and out-of-range values are rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "symparam/ccam.hpp"
#include "symparam/toy.hpp"

#include "json.hpp"

namespace symparam {

struct LandscapeSpec {
  double x_min = -1.0;
  double x_max = 1.0;
  std::size_t x_points = 201;
  double y_min = 0.0;
  double y_max = 1.0;
  std::size_t y_points = 201;
  friend bool operator==(const LandscapeSpec&, const LandscapeSpec&) = default;
};

struct ExperimentConfig {
  toy::ToyExperiment experiment;
  LandscapeSpec landscape;
  std::vector<std::size_t> sweep_widths{8, 16, 64};
  CcamProbeConfig ccam;
  std::string out_dir = "out";

  std::uint64_t seed() const { return experiment.train.seed; }
  void set_seed(std::uint64_t seed);
  // Raises UsageError for invalid values.
  void validate() const;
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& doc);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);
std::string config_to_string(const ExperimentConfig& config);

}  // namespace symparam
