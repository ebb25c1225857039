// Command-line front end: data generation, training, evaluation, loss
// landscapes, size sweeps, Dirichlet draws and the CCAM probe.
//
// Exit codes: 0 success, 2 usage error, 3 data/format error, 4 numerical failure.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "symparam/ccam.hpp"
#include "symparam/checkpoint.hpp"
#include "symparam/config.hpp"
#include "symparam/csv.hpp"
#include "symparam/errors.hpp"
#include "symparam/simplex.hpp"
#include "symparam/toy.hpp"

namespace fs = std::filesystem;
using namespace symparam;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

ExperimentConfig resolve_config(const GlobalOptions& g, const std::optional<std::string>& mode = std::nullopt,
                                const std::vector<double>& fixed_weights = {}) {
  nlohmann::json doc = nlohmann::json::object();
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) throw FormatError("cannot read config " + g.config_path);
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError("config " + g.config_path + " is not valid JSON: " + e.what());
    }
  }
  if (g.seed) doc["seed"] = *g.seed;
  if (g.out_dir) doc["out_dir"] = *g.out_dir;
  if (mode) doc["mode"] = *mode;
  if (!fixed_weights.empty()) doc["fixed_weights"] = fixed_weights;
  return config_from_json(doc);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

// Run metadata, the only artifact allowed to differ between identical runs.
void write_meta(const ExperimentConfig& cfg, const std::string& command, nlohmann::json extra = {}) {
  nlohmann::json meta = {{"command", command},
                         {"seed", cfg.seed()},
                         {"timestamp", utc_timestamp()},
                         {"classification_loss_scale", toy::kClassificationScale},
                         {"classification_loss_scale_applies_to", "training and reporting"}};
  if (extra.is_object()) meta.update(extra);
  auto out = open_output(fs::path(cfg.out_dir) / (command + ".meta.json"));
  out << meta.dump(2) << '\n';
}

std::vector<toy::ToySample> load_or_generate(const ExperimentConfig& cfg, const std::string& data_path) {
  if (!data_path.empty()) return toy::read_dataset_csv(data_path);
  return cfg.experiment.training_set();
}

int cmd_generate_data(const GlobalOptions& g, std::optional<std::size_t> n, const std::string& sampling) {
  auto cfg = resolve_config(g);
  if (!sampling.empty()) cfg.experiment.sampling = toy::parse_sampling(sampling);
  const std::size_t count = n.value_or(cfg.experiment.train_samples);
  const auto samples = toy::make_dataset(count, cfg.experiment.sampling, cfg.seed(), "data");
  const auto path = fs::path(cfg.out_dir) / "dataset.csv";
  auto out = open_output(path);
  toy::write_dataset_csv(out, samples);
  write_meta(cfg, "generate-data", {{"samples", count}, {"sampling", toy::to_string(cfg.experiment.sampling)}});
  std::cout << "seed=" << cfg.seed() << " samples=" << count << " path=" << path.string() << '\n';
  return 0;
}

int cmd_train(const GlobalOptions& g, const std::string& mode, const std::vector<double>& fixed,
              const std::string& data_path, std::optional<std::size_t> stop_after, const std::string& resume) {
  ExperimentConfig cfg;
  std::optional<toy::ToyModel> model;
  std::optional<TrainProgress> progress;
  if (!resume.empty()) {
    const auto ck = load_checkpoint(resume);
    cfg = ck.config;
    if (g.out_dir) cfg.out_dir = *g.out_dir;
    model.emplace(restore_model(ck));
    progress = ck.progress;
  } else {
    cfg = resolve_config(g, mode.empty() ? std::nullopt : std::optional<std::string>(mode), fixed);
    Rng init = make_stream(cfg.seed(), "init");
    model.emplace(toy::Architecture{cfg.experiment.train.mode, 2, cfg.experiment.width, cfg.experiment.hidden_layers,
                                    cfg.experiment.head},
                  init);
  }
  const auto samples = load_or_generate(cfg, data_path);
  const auto data = toy::to_supervised(samples);
  const auto objective = toy::toy_objective(cfg.experiment.clamp_eps);
  Trainer trainer(*model, objective, data, cfg.experiment.train);
  if (progress) trainer.restore(*progress);
  const std::size_t first_epoch = trainer.progress().epochs_done;
  trainer.run(stop_after);

  const fs::path out_dir(cfg.out_dir);
  save_checkpoint(out_dir / "checkpoint.json", make_checkpoint(cfg, *model, trainer.progress()));
  auto hist = open_output(out_dir / "history.csv");
  write_history_csv(hist, trainer.history(), objective.names());
  write_meta(cfg, "train", {{"mode", to_string(cfg.experiment.train.mode)},
                            {"first_epoch", first_epoch},
                            {"epochs_done", trainer.progress().epochs_done},
                            {"train_samples", samples.size()}});
  if (!trainer.history().empty()) {
    const auto& last = trainer.history().back();
    std::cout << "mode=" << to_string(cfg.experiment.train.mode) << " epochs=" << trainer.progress().epochs_done
              << " final_total=" << format_double(last.total) << " L_r=" << format_double(last.terms[0])
              << " L_c=" << format_double(last.terms[1]) << '\n';
  }
  return 0;
}

std::vector<SymParameter> parse_grid(const std::string& text, const std::vector<SymParameter>& fallback) {
  if (text.empty()) return fallback;
  std::vector<SymParameter> grid;
  std::stringstream rows(text);
  std::string row;
  while (std::getline(rows, row, ';')) {
    std::vector<double> v;
    std::stringstream cells(row);
    std::string cell;
    while (std::getline(cells, cell, ',')) v.push_back(parse_double(cell));
    grid.emplace_back(std::move(v));
  }
  return grid;
}

int cmd_evaluate(const GlobalOptions& g, const std::string& checkpoint, const std::vector<std::string>& hyper,
                 const std::string& weights) {
  const auto ck = load_checkpoint(checkpoint);
  ExperimentConfig cfg = ck.config;
  if (g.out_dir) cfg.out_dir = *g.out_dir;
  if (g.seed) cfg.set_seed(*g.seed);
  const auto grid = parse_grid(weights, cfg.experiment.weight_grid);
  const auto evaluation = cfg.experiment.evaluation_set();
  const auto model = restore_model(ck);
  auto report = toy::evaluate_grid(model, evaluation, grid, cfg.experiment.clamp_eps);
  report.seed = cfg.seed();
  report.dataset_id = "eval:" + std::to_string(cfg.experiment.eval_samples);

  const fs::path out_dir(cfg.out_dir);
  if (hyper.empty()) {
    auto out = open_output(out_dir / "report.csv");
    toy::write_report_csv(out, report);
    toy::write_report_csv(std::cout, report);
  } else {
    std::vector<toy::ToyModel> models;
    std::vector<SymParameter> fixed;
    for (const auto& path : hyper) {
      const auto hk = load_checkpoint(path);
      if (hk.architecture.mode != TrainMode::hyper) throw UsageError(path + " is not a hyper-mode checkpoint");
      models.push_back(restore_model(hk));
      fixed.emplace_back(*hk.config.experiment.train.fixed_weights);
    }
    std::vector<const toy::ToyModel*> per_row;
    for (const auto& row : grid) {
      const toy::ToyModel* match = nullptr;
      for (std::size_t i = 0; i < fixed.size(); ++i)
        if (fixed[i] == row) match = &models[i];
      if (!match) throw UsageError("no hyper checkpoint trained with weights " + row.to_string());
      per_row.push_back(match);
    }
    const auto hyper_rep = toy::hyper_report(per_row, grid, evaluation, cfg.experiment.clamp_eps);
    auto out = open_output(out_dir / "comparison.csv");
    toy::write_comparison_csv(out, report, hyper_rep);
    toy::write_comparison_csv(std::cout, report, hyper_rep);
  }
  write_meta(cfg, "evaluate", {{"checkpoint", checkpoint}, {"mode", to_string(ck.architecture.mode)},
                               {"dataset_id", report.dataset_id}});
  return 0;
}

int cmd_landscape(const GlobalOptions& g, const std::vector<double>& s_values, const std::string& checkpoint,
                  bool pgm) {
  ExperimentConfig cfg;
  std::optional<toy::ToyModel> model;
  if (!checkpoint.empty()) {
    const auto ck = load_checkpoint(checkpoint);
    cfg = ck.config;
    if (g.out_dir) cfg.out_dir = *g.out_dir;
    model.emplace(restore_model(ck));
  } else {
    cfg = resolve_config(g);
  }
  const auto s = SymParameter::unchecked(s_values);
  const auto& spec = cfg.landscape;
  const auto land = toy::loss_landscape(s, toy::linspace(spec.x_min, spec.x_max, spec.x_points),
                                        toy::linspace(spec.y_min, spec.y_max, spec.y_points),
                                        model ? &*model : nullptr, cfg.experiment.clamp_eps);
  const fs::path out_dir(cfg.out_dir);
  {
    auto out = open_output(out_dir / "landscape.csv");
    toy::write_landscape_csv(out, land);
  }
  if (model) {
    auto out = open_output(out_dir / "landscape_overlay.csv");
    toy::write_overlay_csv(out, land);
  }
  if (pgm) {
    auto out = open_output(out_dir / "landscape.pgm");
    toy::write_landscape_pgm(out, land);
  }
  write_meta(cfg, "landscape", {{"s", s_values}, {"rows", "y descending"}, {"columns", "x ascending"}});
  std::cout << "landscape " << spec.y_points << "x" << spec.x_points << " S=" << s.to_string() << '\n';
  return 0;
}

int cmd_sweep(const GlobalOptions& g, const std::vector<std::size_t>& widths_flag) {
  auto cfg = resolve_config(g);
  const auto widths = widths_flag.empty() ? cfg.sweep_widths : widths_flag;
  const auto sweep = toy::size_sweep(widths, cfg.experiment);
  auto out = open_output(fs::path(cfg.out_dir) / "sweep.csv");
  toy::write_sweep_csv(out, sweep);
  for (const auto& e : sweep) std::cout << "width=" << e.width << " max_gap=" << format_double(e.max_gap()) << '\n';
  write_meta(cfg, "sweep-size", {{"widths", widths}});
  return 0;
}

int cmd_sample_dirichlet(const GlobalOptions& g, const std::vector<double>& alpha_values, std::size_t n) {
  auto cfg = resolve_config(g);
  const Concentration alpha(alpha_values.empty()
                                ? std::vector<double>(cfg.experiment.train.alpha.values().begin(),
                                                      cfg.experiment.train.alpha.values().end())
                                : alpha_values);
  Rng rng = make_stream(cfg.seed(), "dirichlet");
  auto out = open_output(fs::path(cfg.out_dir) / "dirichlet.csv");
  for (std::size_t i = 0; i < alpha.k(); ++i) out << (i ? "," : "") << "s_" << (i + 1);
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) write_csv_row(out, sample_dirichlet(alpha, rng).values());
  write_meta(cfg, "sample-dirichlet", {{"draws", n}});
  std::cout << "draws=" << n << " k=" << alpha.k() << '\n';
  return 0;
}

int cmd_ccam_probe(const GlobalOptions& g) {
  auto cfg = resolve_config(g);
  const auto result = run_ccam_probe(cfg.ccam);
  const fs::path out_dir(cfg.out_dir);
  {
    auto out = open_output(out_dir / "attention.csv");
    write_attention_csv(out, result.table);
  }
  std::ostringstream summary;
  summary << "ccam_test_mse=" << format_double(result.ccam_mse) << '\n'
          << "concat_test_mse=" << format_double(result.concat_mse) << '\n'
          << "attention_max_spread=" << format_double(result.table.max_spread()) << '\n';
  for (const auto& e : result.gradients.entries)
    summary << "gradcheck " << e.name << " rel_error=" << format_double(e.rel_error) << '\n';
  const bool ok = result.gradients.passed(1e-6);
  summary << "gradcheck max_rel_error=" << format_double(result.gradients.max_rel_error()) << ' '
          << (ok ? "PASS" : "FAIL") << '\n';
  {
    auto out = open_output(out_dir / "ccam_probe.txt");
    out << summary.str();
  }
  std::cout << summary.str();
  write_meta(cfg, "ccam-probe");
  if (!std::isfinite(result.ccam_mse) || !std::isfinite(result.concat_mse))
    throw NumericalError("ccam probe diverged");
  return ok ? 0 : static_cast<int>(ErrorKind::numerical);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sym-parameter toy experiments and CCAM probe"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Experiment seed");
  app.add_option("--out", g.out_dir, "Output directory");

  auto* gen = app.add_subcommand("generate-data", "Write the toy dataset as CSV");
  std::optional<std::size_t> gen_n;
  std::string gen_sampling;
  gen->add_option("--n", gen_n, "Sample count");
  gen->add_option("--sampling", gen_sampling, "grid or random");

  auto* tr = app.add_subcommand("train", "Train a toy model and write a checkpoint and loss history");
  std::string mode, data_path, resume;
  std::vector<double> fixed;
  std::optional<std::size_t> stop_after;
  tr->add_option("--mode", mode, "sym, hyper or s_in");
  tr->add_option("--fixed-weights", fixed, "Loss weights for hyper/s_in, e.g. 0.5,0.5")->delimiter(',');
  tr->add_option("--data", data_path, "Dataset CSV (default: generated from the seed)");
  tr->add_option("--stop-after-epochs", stop_after, "Stop once this many epochs are done");
  tr->add_option("--resume", resume, "Continue from a checkpoint");

  auto* ev = app.add_subcommand("evaluate", "Loss table over the weight grid");
  std::string ev_ckpt, ev_weights;
  std::vector<std::string> ev_hyper;
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint to evaluate")->required();
  ev->add_option("--hyper", ev_hyper, "Hyper-mode checkpoints, one per grid row");
  ev->add_option("--weights", ev_weights, "Grid as 'a,b;c,d;...'");

  auto* ls = app.add_subcommand("landscape", "Weighted-loss landscape over (x, y)");
  std::vector<double> ls_s;
  std::string ls_ckpt;
  bool ls_pgm = false;
  ls->add_option("--s", ls_s, "Sym-parameter, e.g. 0.5,0.5")->delimiter(',')->required();
  ls->add_option("--checkpoint", ls_ckpt, "Model whose outputs are overlaid");
  ls->add_flag("--pgm", ls_pgm, "Also write a grayscale PGM");

  auto* sw = app.add_subcommand("sweep-size", "Sym vs hyper losses across model widths");
  std::vector<std::size_t> widths;
  sw->add_option("--widths", widths, "Widths, e.g. 8,16,64")->delimiter(',');

  auto* sd = app.add_subcommand("sample-dirichlet", "Dirichlet draws as CSV");
  std::vector<double> alpha;
  std::size_t draws = 1000;
  sd->add_option("--alpha", alpha, "Concentration, e.g. 0.5,0.5")->delimiter(',');
  sd->add_option("--n", draws, "Number of draws");

  auto* cp = app.add_subcommand("ccam-probe", "Train CCAM on a synthetic gating task and check gradients");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::usage);
  }

  try {
    if (gen->parsed()) return cmd_generate_data(g, gen_n, gen_sampling);
    if (tr->parsed()) return cmd_train(g, mode, fixed, data_path, stop_after, resume);
    if (ev->parsed()) return cmd_evaluate(g, ev_ckpt, ev_hyper, ev_weights);
    if (ls->parsed()) return cmd_landscape(g, ls_s, ls_ckpt, ls_pgm);
    if (sw->parsed()) return cmd_sweep(g, widths);
    if (sd->parsed()) return cmd_sample_dirichlet(g, alpha, draws);
    if (cp->parsed()) return cmd_ccam_probe(g);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::format);
  }
  return static_cast<int>(ErrorKind::usage);
}
