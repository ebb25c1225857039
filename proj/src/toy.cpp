#include "symparam/toy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "symparam/csv.hpp"
#include "symparam/errors.hpp"
#include "symparam/kernels.hpp"
#include "symparam/ops.hpp"

namespace symparam::toy {

double g(double x) { return x * (x - 0.8) * (x + 0.9) + 0.5; }

double h(double x) { return -0.1 * x + 0.5; }

double label(double x) { return g(x) < h(x) ? 1.0 : 0.0; }

std::string to_string(Sampling s) { return s == Sampling::uniform_grid ? "uniform_grid" : "uniform_random"; }

Sampling parse_sampling(const std::string& text) {
  if (text == "uniform_grid" || text == "grid") return Sampling::uniform_grid;
  if (text == "uniform_random" || text == "random") return Sampling::uniform_random;
  throw UsageError("unknown sampling '" + text + "'");
}

std::string to_string(OutputHead h) { return h == OutputHead::sigmoid ? "sigmoid" : "raw"; }

OutputHead parse_output_head(const std::string& text) {
  if (text == "sigmoid") return OutputHead::sigmoid;
  if (text == "raw") return OutputHead::raw;
  throw UsageError("unknown output head '" + text + "'");
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw UsageError("a grid needs at least 2 points");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  out.back() = hi;
  return out;
}

std::vector<ToySample> make_dataset(std::size_t n, Sampling sampling, std::uint64_t seed,
                                    const std::string& stream) {
  if (n < 2) throw UsageError("dataset needs at least 2 samples, got " + std::to_string(n));
  std::vector<double> xs;
  if (sampling == Sampling::uniform_grid) {
    xs = linspace(-1.0, 1.0, n);
  } else {
    Rng rng = make_stream(seed, stream);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    xs.resize(n);
    for (auto& x : xs) x = dist(rng);
  }
  std::vector<ToySample> out;
  out.reserve(n);
  for (double x : xs) out.push_back({x, g(x), label(x)});
  return out;
}

SupervisedData to_supervised(const std::vector<ToySample>& samples) {
  SupervisedData d;
  d.size = samples.size();
  d.input_dim = 1;
  d.target_dim = 2;
  for (const auto& s : samples) {
    d.inputs.push_back(s.x);
    d.targets.push_back(s.y_r);
    d.targets.push_back(s.y_c);
  }
  return d;
}

void write_dataset_csv(std::ostream& os, const std::vector<ToySample>& samples) {
  os << "x,y_r,y_c\n";
  for (const auto& s : samples) {
    const double row[] = {s.x, s.y_r, s.y_c};
    write_csv_row(os, row);
  }
}

std::vector<ToySample> read_dataset_csv(const std::string& path) {
  const auto table = read_csv(path);
  if (table.header != std::vector<std::string>{"x", "y_r", "y_c"})
    throw FormatError(path + ": expected header x,y_r,y_c");
  std::vector<ToySample> out;
  for (const auto& r : table.rows) {
    if (r[2] != 0.0 && r[2] != 1.0) throw FormatError(path + ": class label must be 0 or 1");
    out.push_back({r[0], r[1], r[2]});
  }
  if (out.size() < 2) throw FormatError(path + ": dataset needs at least 2 samples");
  return out;
}

WeightedObjective toy_objective(double clamp_eps) {
  std::vector<LossTerm> terms;
  terms.push_back({"L_r", [](Tape& tape, const Tensor& pred, const Tensor& target) {
                     return squared_error(tape, pred, target);
                   }, 0});
  terms.push_back({"L_c", [clamp_eps](Tape& tape, const Tensor& pred, const Tensor& target) {
                     return scale(tape, binary_cross_entropy(tape, pred, target, clamp_eps), kClassificationScale);
                   }, 1});
  return WeightedObjective(std::move(terms));
}

ToyModel::ToyModel(const Architecture& arch, Rng& init) : arch_(arch) {
  if (arch_.width < 1) throw UsageError("model width must be at least 1");
  if (arch_.hidden_layers < 1) throw UsageError("model needs at least one hidden layer");
  if (arch_.k < 1) throw UsageError("sym-parameter dimension must be at least 1");
  std::vector<std::size_t> sizes{arch_.input_dim()};
  for (std::size_t i = 0; i < arch_.hidden_layers; ++i) sizes.push_back(arch_.width);
  sizes.push_back(1);
  for (std::size_t layer = 0; layer + 1 < sizes.size(); ++layer) {
    const std::size_t fan_in = sizes[layer], fan_out = sizes[layer + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<double> w(fan_in * fan_out), b(fan_out);
    for (auto& v : w) v = dist(init);
    for (auto& v : b) v = dist(init);
    const auto prefix = "layer" + std::to_string(layer);
    params_.push_back({prefix + ".weight", Tensor({fan_in, fan_out}, std::move(w), true)});
    params_.push_back({prefix + ".bias", Tensor({fan_out}, std::move(b), true)});
  }
}

std::size_t ToyModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

Tensor ToyModel::forward(Tape& tape, const Tensor& inputs, const Tensor& condition) const {
  if (inputs.rank() != 2 || inputs.dim(1) != 1)
    throw DimensionError("toy model expects b×1 inputs, got " + shape_string(inputs.shape()));
  Tensor h = inputs;
  if (takes_condition()) {
    if (!condition.defined() || condition.rank() != 2 || condition.dim(0) != inputs.dim(0) ||
        condition.dim(1) != arch_.k)
      throw DimensionError("toy model expects a b×" + std::to_string(arch_.k) + " condition");
    h = concat_last(tape, inputs, condition);
  }
  const std::size_t layers = params_.size() / 2;
  for (std::size_t layer = 0; layer < layers; ++layer) {
    h = dense(tape, h, params_[2 * layer].tensor, params_[2 * layer + 1].tensor);
    if (layer + 1 < layers) h = activation(tape, h, Activation::relu);
    else if (arch_.head == OutputHead::sigmoid) h = activation(tape, h, Activation::sigmoid);
  }
  return h;
}

std::vector<double> ToyModel::predict(const std::vector<double>& xs, const SymParameter& s) const {
  const std::size_t n = xs.size();
  Tensor condition;
  if (takes_condition()) {
    if (s.k() != arch_.k) throw UsageError("sym-parameter dimension does not match the model");
    std::vector<double> cond;
    cond.reserve(n * s.k());
    for (std::size_t i = 0; i < n; ++i) cond.insert(cond.end(), s.values().begin(), s.values().end());
    condition = Tensor({n, s.k()}, std::move(cond));
  }
  Tape tape;
  const Tensor out = forward(tape, Tensor({n, 1}, xs), condition);
  return {out.data().begin(), out.data().end()};
}

std::vector<SymParameter> table_weight_grid() {
  return {SymParameter({1.0, 0.0}), SymParameter({0.75, 0.25}), SymParameter({0.5, 0.5}),
          SymParameter({0.25, 0.75}), SymParameter({0.0, 1.0})};
}

namespace {

void require_finite_parameters(const ToyModel& model) {
  for (const auto& p : model.parameters())
    for (double v : p.tensor.data())
      if (!std::isfinite(v)) throw NumericalError("evaluation on non-finite parameter " + p.name);
}

struct MeasuredLosses {
  double regression = 0.0;
  double classification = 0.0;
};

MeasuredLosses measure(const ToyModel& model, const std::vector<ToySample>& samples, const SymParameter& s,
                       double clamp_eps = kDefaultClampEps) {
  std::vector<double> xs;
  xs.reserve(samples.size());
  for (const auto& smp : samples) xs.push_back(smp.x);
  const auto pred = model.predict(xs, s);
  MeasuredLosses m;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double d = pred[i] - samples[i].y_r;
    m.regression += d * d;
    m.classification += kernels::clamped_bce(pred[i], samples[i].y_c, clamp_eps);
  }
  const double n = static_cast<double>(samples.size());
  m.regression /= n;
  m.classification = kClassificationScale * m.classification / n;
  return m;
}

EvaluationRow make_row(const SymParameter& w, const MeasuredLosses& m) {
  if (w.k() != 2) throw UsageError("toy weight rows have two components");
  return {w, w[0] * m.regression + w[1] * m.classification, m.regression, m.classification};
}

}  // namespace

EvaluationReport evaluate_grid(const ToyModel& model, const std::vector<ToySample>& samples,
                               const std::vector<SymParameter>& grid, double clamp_eps) {
  if (samples.empty()) throw UsageError("evaluation set is empty");
  require_finite_parameters(model);
  EvaluationReport report;
  report.mode = model.architecture().mode;
  report.rows.resize(grid.size(), EvaluationRow{grid.empty() ? SymParameter({1.0}) : grid[0]});
  if (!model.takes_condition()) {
    // Output does not depend on S; rows reweight the same two losses.
    const auto m = measure(model, samples, grid.empty() ? SymParameter({1.0, 0.0}) : grid[0], clamp_eps);
    for (std::size_t i = 0; i < grid.size(); ++i) report.rows[i] = make_row(grid[i], m);
    return report;
  }
  const auto rows = static_cast<std::int64_t>(grid.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    report.rows[ii] = make_row(grid[ii], measure(model, samples, grid[ii], clamp_eps));
  }
  return report;
}

EvaluationReport hyper_report(const std::vector<const ToyModel*>& models, const std::vector<SymParameter>& grid,
                              const std::vector<ToySample>& samples, double clamp_eps) {
  if (models.size() != grid.size()) throw UsageError("need one hyper model per grid row");
  EvaluationReport report;
  report.mode = TrainMode::hyper;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto single = evaluate_grid(*models[i], samples, {grid[i]}, clamp_eps);
    report.rows.push_back(single.rows.front());
  }
  return report;
}

void write_report_csv(std::ostream& os, const EvaluationReport& report) {
  os << "w_r,w_c,L_total,L_r,L_c\n";
  for (const auto& r : report.rows) {
    const double row[] = {r.weights[0], r.weights[1], r.total, r.regression, r.classification};
    write_csv_row(os, row);
  }
}

void write_comparison_csv(std::ostream& os, const EvaluationReport& sym, const EvaluationReport& hyper) {
  if (sym.rows.size() != hyper.rows.size()) throw UsageError("reports have different row counts");
  os << "w_r,w_c,sym_L,sym_L_r,sym_L_c,hyper_L,hyper_L_r,hyper_L_c\n";
  for (std::size_t i = 0; i < sym.rows.size(); ++i) {
    const auto& a = sym.rows[i];
    const auto& b = hyper.rows[i];
    const double row[] = {a.weights[0], a.weights[1], a.total, a.regression, a.classification,
                          b.total, b.regression, b.classification};
    write_csv_row(os, row);
  }
}

double output_variance_over_grid(const ToyModel& model, const std::vector<ToySample>& samples,
                                 const std::vector<SymParameter>& grid) {
  if (grid.empty() || samples.empty()) throw UsageError("variance needs a non-empty grid and dataset");
  std::vector<double> xs;
  for (const auto& s : samples) xs.push_back(s.x);
  std::vector<std::vector<double>> outputs;
  for (const auto& s : grid) outputs.push_back(model.predict(xs, s));
  double acc = 0.0;
  const double rows = static_cast<double>(grid.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double mu = 0.0;
    for (const auto& o : outputs) mu += o[i];
    mu /= rows;
    double var = 0.0;
    for (const auto& o : outputs) var += (o[i] - mu) * (o[i] - mu);
    acc += var / rows;
  }
  return acc / static_cast<double>(xs.size());
}

LossLandscape loss_landscape(const SymParameter& s, const std::vector<double>& x_grid,
                             const std::vector<double>& y_grid, const ToyModel* model, double clamp_eps) {
  if (s.k() != 2) throw UsageError("landscape needs a two-component sym-parameter");
  if (x_grid.empty() || y_grid.empty()) throw UsageError("landscape grids must be non-empty");
  if (!std::is_sorted(x_grid.begin(), x_grid.end()) || !std::is_sorted(y_grid.begin(), y_grid.end()))
    throw UsageError("landscape grids must be ascending");
  std::vector<double> reg, cls;
  for (double x : x_grid) {
    reg.push_back(g(x));
    cls.push_back(label(x));
  }
  std::vector<double> flat(x_grid.size() * y_grid.size());
  kernels::landscape({reg, cls, s[0], s[1], kClassificationScale, clamp_eps}, y_grid, flat);

  LossLandscape out{x_grid, y_grid, {}, s, {}};
  out.values.resize(y_grid.size());
  for (std::size_t row = 0; row < y_grid.size(); ++row)
    out.values[row].assign(flat.begin() + static_cast<std::ptrdiff_t>(row * x_grid.size()),
                           flat.begin() + static_cast<std::ptrdiff_t>((row + 1) * x_grid.size()));
  if (model) out.overlay = model->predict(x_grid, s);
  return out;
}

void write_landscape_csv(std::ostream& os, const LossLandscape& landscape) {
  for (const auto& row : landscape.values) write_csv_row(os, row);
}

void write_overlay_csv(std::ostream& os, const LossLandscape& landscape) {
  os << "x,f_out\n";
  for (std::size_t i = 0; i < landscape.overlay.size(); ++i) {
    const double row[] = {landscape.x_grid[i], landscape.overlay[i]};
    write_csv_row(os, row);
  }
}

void write_landscape_pgm(std::ostream& os, const LossLandscape& landscape) {
  double lo = landscape.values[0][0], hi = lo;
  for (const auto& row : landscape.values)
    for (double v : row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  os << "P2\n" << landscape.x_grid.size() << ' ' << landscape.y_grid.size() << "\n255\n";
  for (const auto& row : landscape.values) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      const long level = hi > lo ? std::lround(255.0 * (row[i] - lo) / (hi - lo)) : 0;
      os << (i ? " " : "") << level;
    }
    os << '\n';
  }
}

std::vector<ToySample> ToyExperiment::training_set() const {
  return make_dataset(train_samples, sampling, train.seed, "data");
}

std::vector<ToySample> ToyExperiment::evaluation_set() const {
  return make_dataset(eval_samples, Sampling::uniform_random, train.seed, "eval");
}

TrainedToyModel train_toy_model(const ToyExperiment& experiment, TrainMode mode,
                                const std::optional<std::vector<double>>& fixed_weights,
                                const std::vector<ToySample>& training) {
  TrainConfig cfg = experiment.train;
  cfg.mode = mode;
  cfg.fixed_weights = fixed_weights;
  Rng init = make_stream(cfg.seed, "init");
  TrainedToyModel out{ToyModel({mode, 2, experiment.width, experiment.hidden_layers, experiment.head}, init), {}};
  const auto objective = toy_objective(experiment.clamp_eps);
  const auto data = to_supervised(training);
  out.history = train(out.model, objective, data, cfg).history;
  return out;
}

double SweepEntry::max_gap() const {
  double gap = 0.0;
  for (std::size_t i = 0; i < sym.rows.size(); ++i) gap = std::max(gap, std::abs(sym.rows[i].total - hyper.rows[i].total));
  return gap;
}

std::vector<SweepEntry> size_sweep(const std::vector<std::size_t>& widths, const ToyExperiment& experiment) {
  if (widths.empty()) throw UsageError("size sweep needs at least one width");
  for (auto w : widths)
    if (w < 1) throw UsageError("sweep widths must be at least 1");
  const auto training = experiment.training_set();
  const auto evaluation = experiment.evaluation_set();
  const auto& grid = experiment.weight_grid;
  const std::size_t runs_per_width = 1 + grid.size();

  // Every (width, run) pair is an independent training job.
  std::vector<std::optional<TrainedToyModel>> trained(widths.size() * runs_per_width);
  const auto jobs = static_cast<std::int64_t>(trained.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t job = 0; job < jobs; ++job) {
    try {
      const auto j = static_cast<std::size_t>(job);
      ToyExperiment local = experiment;
      local.width = widths[j / runs_per_width];
      const std::size_t run = j % runs_per_width;
      if (run == 0) {
        trained[j] = train_toy_model(local, TrainMode::sym, std::nullopt, training);
      } else {
        const auto w = grid[run - 1].values();
        trained[j] = train_toy_model(local, TrainMode::hyper, std::vector<double>(w.begin(), w.end()), training);
      }
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<SweepEntry> out;
  for (std::size_t wi = 0; wi < widths.size(); ++wi) {
    SweepEntry entry;
    entry.width = widths[wi];
    entry.sym = evaluate_grid(trained[wi * runs_per_width]->model, evaluation, grid, experiment.clamp_eps);
    std::vector<const ToyModel*> hyper_models;
    for (std::size_t r = 1; r < runs_per_width; ++r) hyper_models.push_back(&trained[wi * runs_per_width + r]->model);
    entry.hyper = hyper_report(hyper_models, grid, evaluation, experiment.clamp_eps);
    out.push_back(std::move(entry));
  }
  return out;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepEntry>& sweep) {
  os << "width,w_r,w_c,sym_L,hyper_L,gap\n";
  for (const auto& e : sweep) {
    for (std::size_t i = 0; i < e.sym.rows.size(); ++i) {
      const auto& a = e.sym.rows[i];
      const auto& b = e.hyper.rows[i];
      os << e.width << ',';
      const double row[] = {a.weights[0], a.weights[1], a.total, b.total, a.total - b.total};
      write_csv_row(os, row);
    }
  }
}

}  // namespace symparam::toy
