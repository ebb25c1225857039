#pragma once

// Toy-model checkpoints: a JSON document holding the experiment config, the
// architecture, named flat parameter arrays, optimizer moments, generator
// states and training progress.

#include <filesystem>
#include <string>
#include <vector>

#include "symparam/config.hpp"
#include "symparam/toy.hpp"
#include "symparam/trainer.hpp"

namespace symparam {

inline constexpr int kCheckpointFormatVersion = 1;

struct StoredArray {
  std::string name;
  Shape shape;
  std::vector<double> values;
  friend bool operator==(const StoredArray&, const StoredArray&) = default;
};

struct Checkpoint {
  int format_version = kCheckpointFormatVersion;
  ExperimentConfig config;  // mode and fixed_weights describe the trained model
  toy::Architecture architecture;
  std::vector<StoredArray> parameters;
  TrainProgress progress;
};

Checkpoint make_checkpoint(const ExperimentConfig& config, const toy::ToyModel& model, const TrainProgress& progress);

// Model with the stored parameter values; FormatError when they do not fit
// the stored architecture.
toy::ToyModel restore_model(const Checkpoint& checkpoint);

std::string checkpoint_to_string(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_string(const std::string& text);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace symparam
