#include "symparam/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "symparam/csv.hpp"
#include "symparam/errors.hpp"

namespace symparam {

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::sym: return "sym";
    case TrainMode::hyper: return "hyper";
    case TrainMode::s_in: return "s_in";
  }
  return "?";
}

TrainMode parse_train_mode(const std::string& text) {
  if (text == "sym") return TrainMode::sym;
  if (text == "hyper") return TrainMode::hyper;
  if (text == "s_in") return TrainMode::s_in;
  throw UsageError("unknown mode '" + text + "' (expected sym, hyper or s_in)");
}

std::string to_string(SampleGranularity g) {
  return g == SampleGranularity::per_batch ? "per_batch" : "per_example";
}

SampleGranularity parse_granularity(const std::string& text) {
  if (text == "per_batch") return SampleGranularity::per_batch;
  if (text == "per_example") return SampleGranularity::per_example;
  throw UsageError("unknown sampling granularity '" + text + "'");
}

std::size_t TrainConfig::total_epochs() const {
  std::size_t n = 0;
  for (const auto& s : schedule) n += s.epochs;
  return n;
}

double TrainConfig::learning_rate_at(std::size_t epoch) const {
  for (const auto& s : schedule) {
    if (epoch < s.epochs) return s.learning_rate;
    epoch -= s.epochs;
  }
  throw UsageError("epoch beyond the learning-rate schedule");
}

void TrainConfig::validate(std::size_t k) const {
  if (batch_size < 1) throw UsageError("batch_size must be at least 1");
  for (const auto& s : schedule)
    if (!(s.learning_rate > 0.0) || !std::isfinite(s.learning_rate))
      throw UsageError("learning rates must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 && adam.eps > 0.0))
    throw UsageError("adam parameters out of range");
  if (mode != TrainMode::hyper && alpha.k() != k)
    throw UsageError("concentration has " + std::to_string(alpha.k()) + " entries for " +
                     std::to_string(k) + " loss terms");
  if (mode != TrainMode::sym) {
    if (!fixed_weights) throw UsageError("mode " + to_string(mode) + " requires fixed_weights");
    if (fixed_weights->size() != k)
      throw UsageError("fixed_weights has " + std::to_string(fixed_weights->size()) + " entries for " +
                       std::to_string(k) + " loss terms");
    SymParameter check(*fixed_weights);
  }
}

Trainer::Trainer(ConditionedModel& model, const WeightedObjective& objective, const SupervisedData& data,
                 TrainConfig config)
    : model_(model),
      objective_(objective),
      data_(data),
      config_(std::move(config)),
      dirichlet_rng_(make_stream(config_.seed, "dirichlet")),
      shuffle_rng_(make_stream(config_.seed, "shuffle")) {
  config_.validate(objective_.k());
  if (data_.size == 0) throw UsageError("training data is empty");
  if (data_.inputs.size() != data_.size * data_.input_dim || data_.targets.size() != data_.size * data_.target_dim)
    throw DimensionError("training data buffers do not match their declared shape");
  const bool wants_condition = config_.mode != TrainMode::hyper;
  if (model_.takes_condition() != wants_condition)
    throw UsageError("mode " + to_string(config_.mode) +
                     (wants_condition ? " needs a model with a condition input" : " needs a model without a condition input"));
  for (const auto& p : model_.parameters()) params_.push_back(p.tensor);
}

TrainProgress Trainer::progress() const {
  return {epochs_done_, adam_, rng_state(dirichlet_rng_), rng_state(shuffle_rng_)};
}

void Trainer::restore(const TrainProgress& progress) {
  if (progress.epochs_done > config_.total_epochs()) throw UsageError("checkpoint is past the end of the schedule");
  epochs_done_ = progress.epochs_done;
  adam_ = progress.adam;
  set_rng_state(dirichlet_rng_, progress.dirichlet_rng);
  set_rng_state(shuffle_rng_, progress.shuffle_rng);
}

void Trainer::run(std::optional<std::size_t> until_epoch) {
  const std::size_t stop = std::min(until_epoch.value_or(config_.total_epochs()), config_.total_epochs());
  while (epochs_done_ < stop) {
    run_epoch(epochs_done_);
    ++epochs_done_;
  }
}

void Trainer::run_epoch(std::size_t epoch) {
  const std::size_t k = objective_.k();
  const double lr = config_.learning_rate_at(epoch);
  std::vector<std::size_t> order(data_.size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), shuffle_rng_);

  const bool feeds_condition = config_.mode != TrainMode::hyper;
  const bool per_example = config_.granularity == SampleGranularity::per_example;

  std::size_t batch_index = 0;
  for (std::size_t start = 0; start < data_.size; start += config_.batch_size, ++batch_index) {
    const std::size_t rows = std::min(config_.batch_size, data_.size - start);
    std::vector<double> inputs, targets;
    inputs.reserve(rows * data_.input_dim);
    targets.reserve(rows * data_.target_dim);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t i = order[start + r];
      inputs.insert(inputs.end(), data_.inputs.begin() + static_cast<std::ptrdiff_t>(i * data_.input_dim),
                    data_.inputs.begin() + static_cast<std::ptrdiff_t>((i + 1) * data_.input_dim));
      targets.insert(targets.end(), data_.targets.begin() + static_cast<std::ptrdiff_t>(i * data_.target_dim),
                     data_.targets.begin() + static_cast<std::ptrdiff_t>((i + 1) * data_.target_dim));
    }
    const Tensor x({rows, data_.input_dim}, std::move(inputs));
    const Tensor y({rows, data_.target_dim}, std::move(targets));

    // Condition fed to the model, one row per sample.
    Tensor condition;
    std::vector<double> batch_weights;
    if (feeds_condition) {
      std::vector<double> cond;
      cond.reserve(rows * k);
      if (per_example) {
        for (std::size_t r = 0; r < rows; ++r) {
          const auto s = sample_dirichlet(config_.alpha, dirichlet_rng_);
          cond.insert(cond.end(), s.values().begin(), s.values().end());
        }
      } else {
        const auto s = sample_dirichlet(config_.alpha, dirichlet_rng_);
        for (std::size_t r = 0; r < rows; ++r) cond.insert(cond.end(), s.values().begin(), s.values().end());
      }
      condition = Tensor({rows, k}, std::move(cond));
    }

    for (auto& p : params_) p.zero_grad();
    Tape tape;
    CombinedLoss loss;
    try {
      const Tensor out = model_.forward(tape, x, condition);
      if (config_.mode == TrainMode::sym && per_example) {
        loss = combine_losses_per_example(tape, objective_, condition, out, y);
        batch_weights.assign(k, 0.0);
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < k; ++j) batch_weights[j] += condition.at(r * k + j) / static_cast<double>(rows);
      } else {
        const SymParameter weights = config_.mode == TrainMode::sym
                                         ? SymParameter(std::vector<double>(condition.data().begin(),
                                                                            condition.data().begin() + static_cast<std::ptrdiff_t>(k)))
                                         : SymParameter(*config_.fixed_weights);
        loss = combine_losses(tape, objective_, weights, out, y);
        batch_weights.assign(weights.values().begin(), weights.values().end());
      }
      tape.backward(loss.total);
    } catch (const NumericalError& e) {
      throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ": " + e.what());
    }
    for (const auto& p : params_) {
      if (!p.has_grad()) continue;
      for (double g : p.grad())
        if (!std::isfinite(g))
          throw NumericalError("non-finite gradient at epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batch_index));
    }
    adam_step(params_, adam_, lr, config_.adam);
    history_.push_back({epoch, batch_index, std::move(batch_weights), loss.total.item(), loss.term_values()});
  }
}

TrainResult train(ConditionedModel& model, const WeightedObjective& objective, const SupervisedData& data,
                  const TrainConfig& config) {
  Trainer trainer(model, objective, data, config);
  trainer.run();
  return {trainer.history(), trainer.progress()};
}

void write_history_csv(std::ostream& os, const std::vector<HistoryRow>& history,
                       const std::vector<std::string>& term_names, bool header) {
  if (header) {
    os << "epoch,batch";
    for (std::size_t i = 0; i < term_names.size(); ++i) os << ",s_" << (i + 1);
    os << ",total_loss";
    for (const auto& n : term_names) os << ',' << n;
    os << '\n';
  }
  for (const auto& row : history) {
    os << row.epoch << ',' << row.batch;
    for (double w : row.weights) os << ',' << format_double(w);
    os << ',' << format_double(row.total);
    for (double t : row.terms) os << ',' << format_double(t);
    os << '\n';
  }
}

}  // namespace symparam
