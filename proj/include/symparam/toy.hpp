#pragma once

// One-dimensional regression + classification problem solved by a single
// network conditioned on (and trained with) the loss-weight vector.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "symparam/rng.hpp"
#include "symparam/simplex.hpp"
#include "symparam/trainer.hpp"

namespace symparam::toy {

inline constexpr double kClassificationScale = 0.2;
inline constexpr double kDefaultClampEps = 1e-6;

// Regression target x(x − 0.8)(x + 0.9) + 0.5.
double g(double x);
// Class boundary −0.1x + 0.5.
double h(double x);
// 1 when g(x) < h(x) (strict), else 0.
double label(double x);

struct ToySample {
  double x = 0.0;
  double y_r = 0.0;
  double y_c = 0.0;
  friend bool operator==(const ToySample&, const ToySample&) = default;
};

enum class Sampling { uniform_grid, uniform_random };
std::string to_string(Sampling s);
Sampling parse_sampling(const std::string& text);

// n ≥ 2 samples with x in [−1, 1]. Random sampling draws from `stream` of `seed`.
std::vector<ToySample> make_dataset(std::size_t n, Sampling sampling, std::uint64_t seed,
                                    const std::string& stream = "data");
SupervisedData to_supervised(const std::vector<ToySample>& samples);

void write_dataset_csv(std::ostream& os, const std::vector<ToySample>& samples);
std::vector<ToySample> read_dataset_csv(const std::string& path);

// L_r = MSE(f, y_r), L_c = 0.2 · BCE(clamp(f), y_c).
WeightedObjective toy_objective(double clamp_eps = kDefaultClampEps);

// Squashing applied to the single output unit. `raw` leaves it linear and relies on the BCE clamp.
enum class OutputHead { sigmoid, raw };
std::string to_string(OutputHead h);
OutputHead parse_output_head(const std::string& text);

struct Architecture {
  TrainMode mode = TrainMode::sym;
  std::size_t k = 2;
  std::size_t width = 64;
  std::size_t hidden_layers = 3;
  OutputHead head = OutputHead::sigmoid;

  std::size_t input_dim() const { return mode == TrainMode::hyper ? 1 : 1 + k; }
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

// MLP f(x, S): (1 + k) → width → … → width → 1 with ReLU between layers and the chosen head.
// Hyper-mode models take x alone.
class ToyModel final : public ConditionedModel {
 public:
  // Weights and biases uniform in ±1/√fan_in.
  ToyModel(const Architecture& arch, Rng& init);

  Tensor forward(Tape& tape, const Tensor& inputs, const Tensor& condition) const override;
  bool takes_condition() const override { return arch_.mode != TrainMode::hyper; }
  std::vector<NamedTensor> parameters() const override { return params_; }

  const Architecture& architecture() const noexcept { return arch_; }
  // f(x, S) for each x; S ignored by hyper models.
  std::vector<double> predict(const std::vector<double>& xs, const SymParameter& s) const;
  std::size_t parameter_count() const;

 private:
  Architecture arch_;
  std::vector<NamedTensor> params_;  // layer{i}.weight, layer{i}.bias
};

// The five weight rows (1,0) … (0,1) in steps of 0.25.
std::vector<SymParameter> table_weight_grid();

struct EvaluationRow {
  SymParameter weights;
  double total = 0.0;
  double regression = 0.0;
  double classification = 0.0;  // already scaled by 0.2
};

struct EvaluationReport {
  std::vector<EvaluationRow> rows;
  TrainMode mode = TrainMode::sym;
  std::uint64_t seed = 0;
  std::string dataset_id;
};

// Mean L_r and L_c over `samples` per weight row, feeding the row as S to
// conditioned models; total is w_r·L_r + w_c·L_c.
EvaluationReport evaluate_grid(const ToyModel& model, const std::vector<ToySample>& samples,
                               const std::vector<SymParameter>& grid, double clamp_eps = kDefaultClampEps);

// Table with one row per grid point taken from the hyper model trained at it.
EvaluationReport hyper_report(const std::vector<const ToyModel*>& models,
                              const std::vector<SymParameter>& grid, const std::vector<ToySample>& samples,
                              double clamp_eps = kDefaultClampEps);

void write_report_csv(std::ostream& os, const EvaluationReport& report);
// Sym block and hyper block side by side.
void write_comparison_csv(std::ostream& os, const EvaluationReport& sym, const EvaluationReport& hyper);

// Population variance of f(x, S) over the grid, averaged over samples.
double output_variance_over_grid(const ToyModel& model, const std::vector<ToySample>& samples,
                                 const std::vector<SymParameter>& grid);

// n evenly spaced values from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t n);

struct LossLandscape {
  std::vector<double> x_grid;  // ascending
  std::vector<double> y_grid;  // ascending
  // values[row][col]: row 0 is the largest y, col follows x_grid.
  std::vector<std::vector<double>> values;
  SymParameter s;
  std::vector<double> overlay;  // f(x, S) per x_grid point when a model was given
};

LossLandscape loss_landscape(const SymParameter& s, const std::vector<double>& x_grid,
                             const std::vector<double>& y_grid, const ToyModel* model = nullptr,
                             double clamp_eps = kDefaultClampEps);

void write_landscape_csv(std::ostream& os, const LossLandscape& landscape);
void write_overlay_csv(std::ostream& os, const LossLandscape& landscape);
// Plain PGM ("P2"), maxval 255, values min-max normalized.
void write_landscape_pgm(std::ostream& os, const LossLandscape& landscape);

struct ToyExperiment {
  TrainConfig train;  // mode and fixed_weights are set per run
  std::size_t width = 64;
  std::size_t hidden_layers = 3;
  OutputHead head = OutputHead::sigmoid;
  std::size_t train_samples = 1024;
  std::size_t eval_samples = 256;
  Sampling sampling = Sampling::uniform_random;
  double clamp_eps = kDefaultClampEps;
  std::vector<SymParameter> weight_grid = table_weight_grid();

  std::vector<ToySample> training_set() const;
  std::vector<ToySample> evaluation_set() const;
};

struct TrainedToyModel {
  ToyModel model;
  std::vector<HistoryRow> history;
};

TrainedToyModel train_toy_model(const ToyExperiment& experiment, TrainMode mode,
                                const std::optional<std::vector<double>>& fixed_weights,
                                const std::vector<ToySample>& training);

struct SweepEntry {
  std::size_t width = 0;
  EvaluationReport sym;
  EvaluationReport hyper;
  double max_gap() const;  // max over rows |L(sym) − L(hyper)|
};

// One sym model and one hyper model per grid row for every width.
std::vector<SweepEntry> size_sweep(const std::vector<std::size_t>& widths, const ToyExperiment& experiment);

void write_sweep_csv(std::ostream& os, const std::vector<SweepEntry>& sweep);

}  // namespace symparam::toy
