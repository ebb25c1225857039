#pragma once

// Training loop that resamples the sym-parameter per batch, feeds it to the
// model and uses it to weight the objective.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "symparam/adam.hpp"
#include "symparam/gradcheck.hpp"
#include "symparam/objective.hpp"
#include "symparam/simplex.hpp"
#include "symparam/tensor.hpp"

namespace symparam {

enum class TrainMode {
  sym,    // S ~ Dirichlet(α) is the model input and the loss weights
  hyper,  // no S input, losses weighted by fixed_weights
  s_in,   // S ~ Dirichlet(α) is the model input, losses weighted by fixed_weights
};

enum class SampleGranularity { per_batch, per_example };

std::string to_string(TrainMode mode);
TrainMode parse_train_mode(const std::string& text);
std::string to_string(SampleGranularity g);
SampleGranularity parse_granularity(const std::string& text);

struct ScheduleStage {
  std::size_t epochs = 0;
  double learning_rate = 0.0;
  friend bool operator==(const ScheduleStage&, const ScheduleStage&) = default;
};

struct TrainConfig {
  std::size_t batch_size = 16;
  std::vector<ScheduleStage> schedule{{200, 0.01}, {200, 0.001}, {100, 0.0001}};
  AdamConfig adam{};
  Concentration alpha{{0.5, 0.5}};
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::sym;
  std::optional<std::vector<double>> fixed_weights;
  SampleGranularity granularity = SampleGranularity::per_batch;

  std::size_t total_epochs() const;
  double learning_rate_at(std::size_t epoch) const;
  // Raises UsageError/DomainError for invalid combinations.
  void validate(std::size_t k) const;
};

// Row-major supervised data: inputs n×input_dim, targets n×target_dim.
struct SupervisedData {
  std::size_t size = 0;
  std::size_t input_dim = 0;
  std::size_t target_dim = 0;
  std::vector<double> inputs;
  std::vector<double> targets;
};

class ConditionedModel {
 public:
  virtual ~ConditionedModel() = default;
  // `condition` is b×k, or undefined for models without a condition input.
  virtual Tensor forward(Tape& tape, const Tensor& inputs, const Tensor& condition) const = 0;
  virtual bool takes_condition() const = 0;
  virtual std::vector<NamedTensor> parameters() const = 0;
};

struct HistoryRow {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  std::vector<double> weights;  // loss weights applied (batch mean for per-example sampling)
  double total = 0.0;
  std::vector<double> terms;

  friend bool operator==(const HistoryRow&, const HistoryRow&) = default;
};

// Everything besides the model parameters needed to continue a run.
struct TrainProgress {
  std::size_t epochs_done = 0;
  AdamState adam;
  std::string dirichlet_rng;
  std::string shuffle_rng;

  friend bool operator==(const TrainProgress&, const TrainProgress&) = default;
};

class Trainer {
 public:
  Trainer(ConditionedModel& model, const WeightedObjective& objective, const SupervisedData& data,
          TrainConfig config);

  // Trains through epoch `until_epoch` (exclusive), default the whole schedule.
  void run(std::optional<std::size_t> until_epoch = std::nullopt);

  const std::vector<HistoryRow>& history() const noexcept { return history_; }
  TrainProgress progress() const;
  void restore(const TrainProgress& progress);
  const TrainConfig& config() const noexcept { return config_; }

 private:
  void run_epoch(std::size_t epoch);

  ConditionedModel& model_;
  const WeightedObjective& objective_;
  const SupervisedData& data_;
  TrainConfig config_;
  std::vector<Tensor> params_;
  AdamState adam_;
  Rng dirichlet_rng_;
  Rng shuffle_rng_;
  std::size_t epochs_done_ = 0;
  std::vector<HistoryRow> history_;
};

struct TrainResult {
  std::vector<HistoryRow> history;
  TrainProgress progress;
};

TrainResult train(ConditionedModel& model, const WeightedObjective& objective, const SupervisedData& data,
                  const TrainConfig& config);

// CSV with columns epoch,batch,s_1..s_k,total_loss,<term names>.
void write_history_csv(std::ostream& os, const std::vector<HistoryRow>& history,
                       const std::vector<std::string>& term_names, bool header = true);

}  // namespace symparam
