#include "symparam/config.hpp"

#include <fstream>
#include <set>

#include "symparam/csv.hpp"
#include "symparam/errors.hpp"

namespace symparam {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw UsageError("config: '" + where + "' must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw UsageError("config: unknown key '" + where + (where.empty() ? "" : ".") + key + "'");
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError("config: bad value for '" + where + key + "': " + e.what());
  }
}

std::vector<double> weights_of(const SymParameter& s) { return {s.values().begin(), s.values().end()}; }

}  // namespace

void ExperimentConfig::set_seed(std::uint64_t seed) {
  experiment.train.seed = seed;
  ccam.seed = seed;
}

void ExperimentConfig::validate() const {
  const auto& e = experiment;
  e.train.validate(2);
  if (e.train.alpha.k() != 2) throw UsageError("config: alpha must have two entries for the toy problem");
  if (e.width < 1 || e.hidden_layers < 1) throw UsageError("config: model width and depth must be positive");
  if (e.train_samples < 2 || e.eval_samples < 2) throw UsageError("config: datasets need at least 2 samples");
  if (!(e.clamp_eps > 0.0 && e.clamp_eps < 0.5)) throw UsageError("config: bce_clamp_eps must be in (0, 0.5)");
  if (e.weight_grid.empty()) throw UsageError("config: weight_grid is empty");
  for (const auto& w : e.weight_grid)
    if (w.k() != 2) throw UsageError("config: weight_grid rows need two entries");
  if (landscape.x_points < 2 || landscape.y_points < 2 || !(landscape.x_min < landscape.x_max) ||
      !(landscape.y_min < landscape.y_max))
    throw UsageError("config: invalid landscape grid");
  if (sweep_widths.empty()) throw UsageError("config: sweep_widths is empty");
  for (auto w : sweep_widths)
    if (w < 1) throw UsageError("config: sweep widths must be positive");
  if (ccam.channels < 1 || ccam.k < 1 || ccam.reduction < 1 || ccam.height < 1 || ccam.width < 1 ||
      ccam.train_samples < 1 || ccam.test_samples < 1 || ccam.batch_size < 1 || !(ccam.learning_rate > 0.0))
    throw UsageError("config: invalid ccam_probe settings");
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return to_json(a) == to_json(b); }

json to_json(const ExperimentConfig& c) {
  const auto& e = c.experiment;
  const auto& t = e.train;
  json schedule = json::array();
  for (const auto& s : t.schedule) schedule.push_back({{"epochs", s.epochs}, {"learning_rate", s.learning_rate}});
  json grid = json::array();
  for (const auto& w : e.weight_grid) grid.push_back(weights_of(w));
  return {
      {"seed", t.seed},
      {"mode", to_string(t.mode)},
      {"fixed_weights", t.fixed_weights ? json(*t.fixed_weights) : json(nullptr)},
      {"alpha", std::vector<double>(t.alpha.values().begin(), t.alpha.values().end())},
      {"batch_size", t.batch_size},
      {"schedule", schedule},
      {"adam", {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"eps", t.adam.eps}}},
      {"granularity", to_string(t.granularity)},
      {"dataset",
       {{"train_samples", e.train_samples}, {"eval_samples", e.eval_samples}, {"sampling", toy::to_string(e.sampling)}}},
      {"model", {{"width", e.width}, {"hidden_layers", e.hidden_layers}, {"head", toy::to_string(e.head)}}},
      {"bce_clamp_eps", e.clamp_eps},
      {"weight_grid", grid},
      {"landscape",
       {{"x_min", c.landscape.x_min}, {"x_max", c.landscape.x_max}, {"x_points", c.landscape.x_points},
        {"y_min", c.landscape.y_min}, {"y_max", c.landscape.y_max}, {"y_points", c.landscape.y_points}}},
      {"sweep_widths", c.sweep_widths},
      {"ccam_probe",
       {{"height", c.ccam.height}, {"width", c.ccam.width}, {"channels", c.ccam.channels}, {"k", c.ccam.k},
        {"reduction", c.ccam.reduction}, {"train_samples", c.ccam.train_samples},
        {"test_samples", c.ccam.test_samples}, {"epochs", c.ccam.epochs}, {"batch_size", c.ccam.batch_size},
        {"learning_rate", c.ccam.learning_rate}, {"mask_scale", c.ccam.mask_scale}}},
      {"out_dir", c.out_dir},
  };
}

ExperimentConfig config_from_json(const json& doc) {
  reject_unknown(doc,
                 {"seed", "mode", "fixed_weights", "alpha", "batch_size", "schedule", "adam", "granularity", "dataset",
                  "model", "bce_clamp_eps", "weight_grid", "landscape", "sweep_widths", "ccam_probe", "out_dir"},
                 "");
  ExperimentConfig c;
  auto& e = c.experiment;
  auto& t = e.train;

  std::uint64_t seed = 0;
  read(doc, "seed", seed, "");
  c.set_seed(seed);

  std::string text;
  if (doc.contains("mode")) {
    read(doc, "mode", text, "");
    t.mode = parse_train_mode(text);
  }
  if (doc.contains("fixed_weights") && !doc.at("fixed_weights").is_null()) {
    std::vector<double> w;
    read(doc, "fixed_weights", w, "");
    t.fixed_weights = w;
  }
  if (doc.contains("alpha")) {
    std::vector<double> alpha;
    read(doc, "alpha", alpha, "");
    t.alpha = Concentration(alpha);
  }
  read(doc, "batch_size", t.batch_size, "");
  if (doc.contains("schedule")) {
    t.schedule.clear();
    for (const auto& stage : doc.at("schedule")) {
      reject_unknown(stage, {"epochs", "learning_rate"}, "schedule[]");
      ScheduleStage s;
      read(stage, "epochs", s.epochs, "schedule[].");
      read(stage, "learning_rate", s.learning_rate, "schedule[].");
      t.schedule.push_back(s);
    }
  }
  if (doc.contains("adam")) {
    const auto& a = doc.at("adam");
    reject_unknown(a, {"beta1", "beta2", "eps"}, "adam");
    read(a, "beta1", t.adam.beta1, "adam.");
    read(a, "beta2", t.adam.beta2, "adam.");
    read(a, "eps", t.adam.eps, "adam.");
  }
  if (doc.contains("granularity")) {
    read(doc, "granularity", text, "");
    t.granularity = parse_granularity(text);
  }
  if (doc.contains("dataset")) {
    const auto& d = doc.at("dataset");
    reject_unknown(d, {"train_samples", "eval_samples", "sampling"}, "dataset");
    read(d, "train_samples", e.train_samples, "dataset.");
    read(d, "eval_samples", e.eval_samples, "dataset.");
    if (d.contains("sampling")) {
      read(d, "sampling", text, "dataset.");
      e.sampling = toy::parse_sampling(text);
    }
  }
  if (doc.contains("model")) {
    const auto& m = doc.at("model");
    reject_unknown(m, {"width", "hidden_layers", "head"}, "model");
    read(m, "width", e.width, "model.");
    read(m, "hidden_layers", e.hidden_layers, "model.");
    if (m.contains("head")) {
      read(m, "head", text, "model.");
      e.head = toy::parse_output_head(text);
    }
  }
  read(doc, "bce_clamp_eps", e.clamp_eps, "");
  if (doc.contains("weight_grid")) {
    std::vector<std::vector<double>> grid;
    read(doc, "weight_grid", grid, "");
    e.weight_grid.clear();
    for (auto& w : grid) e.weight_grid.emplace_back(std::move(w));
  }
  if (doc.contains("landscape")) {
    const auto& l = doc.at("landscape");
    reject_unknown(l, {"x_min", "x_max", "x_points", "y_min", "y_max", "y_points"}, "landscape");
    read(l, "x_min", c.landscape.x_min, "landscape.");
    read(l, "x_max", c.landscape.x_max, "landscape.");
    read(l, "x_points", c.landscape.x_points, "landscape.");
    read(l, "y_min", c.landscape.y_min, "landscape.");
    read(l, "y_max", c.landscape.y_max, "landscape.");
    read(l, "y_points", c.landscape.y_points, "landscape.");
  }
  read(doc, "sweep_widths", c.sweep_widths, "");
  if (doc.contains("ccam_probe")) {
    const auto& p = doc.at("ccam_probe");
    reject_unknown(p,
                   {"height", "width", "channels", "k", "reduction", "train_samples", "test_samples", "epochs",
                    "batch_size", "learning_rate", "mask_scale"},
                   "ccam_probe");
    read(p, "height", c.ccam.height, "ccam_probe.");
    read(p, "width", c.ccam.width, "ccam_probe.");
    read(p, "channels", c.ccam.channels, "ccam_probe.");
    read(p, "k", c.ccam.k, "ccam_probe.");
    read(p, "reduction", c.ccam.reduction, "ccam_probe.");
    read(p, "train_samples", c.ccam.train_samples, "ccam_probe.");
    read(p, "test_samples", c.ccam.test_samples, "ccam_probe.");
    read(p, "epochs", c.ccam.epochs, "ccam_probe.");
    read(p, "batch_size", c.ccam.batch_size, "ccam_probe.");
    read(p, "learning_rate", c.ccam.learning_rate, "ccam_probe.");
    read(p, "mask_scale", c.ccam.mask_scale, "ccam_probe.");
  }
  read(doc, "out_dir", c.out_dir, "");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

std::string config_to_string(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

void save_config(const std::filesystem::path& path, const ExperimentConfig& config) {
  auto out = open_output(path);
  out << config_to_string(config);
}

}  // namespace symparam
