#include "symparam/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "symparam/csv.hpp"
#include "symparam/errors.hpp"

namespace symparam {

using nlohmann::json;

Checkpoint make_checkpoint(const ExperimentConfig& config, const toy::ToyModel& model, const TrainProgress& progress) {
  Checkpoint ck;
  ck.config = config;
  // output location is not part of the run
  ck.config.out_dir = ExperimentConfig{}.out_dir;
  ck.architecture = model.architecture();
  for (const auto& p : model.parameters())
    ck.parameters.push_back({p.name, p.tensor.shape(), {p.tensor.data().begin(), p.tensor.data().end()}});
  ck.progress = progress;
  return ck;
}

toy::ToyModel restore_model(const Checkpoint& ck) {
  Rng scratch(0);
  toy::ToyModel model(ck.architecture, scratch);
  auto params = model.parameters();
  if (params.size() != ck.parameters.size())
    throw FormatError("checkpoint stores " + std::to_string(ck.parameters.size()) + " arrays, architecture needs " +
                      std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& stored = ck.parameters[i];
    if (stored.name != params[i].name || stored.shape != params[i].tensor.shape() ||
        stored.values.size() != params[i].tensor.size())
      throw FormatError("checkpoint array '" + stored.name + "' does not match the architecture");
    auto dst = params[i].tensor.mutable_data();
    std::copy(stored.values.begin(), stored.values.end(), dst.begin());
  }
  return model;
}

std::string checkpoint_to_string(const Checkpoint& ck) {
  json params = json::array();
  for (const auto& p : ck.parameters) params.push_back({{"name", p.name}, {"shape", p.shape}, {"values", p.values}});
  json doc = {
      {"format_version", ck.format_version},
      {"mode", to_string(ck.architecture.mode)},
      {"architecture",
       {{"input_dim", ck.architecture.input_dim()}, {"k", ck.architecture.k}, {"width", ck.architecture.width},
        {"hidden_layers", ck.architecture.hidden_layers}, {"head", toy::to_string(ck.architecture.head)}}},
      {"config", to_json(ck.config)},
      {"parameters", params},
      {"adam",
       {{"step", ck.progress.adam.step},
        {"first_moment", ck.progress.adam.first_moment},
        {"second_moment", ck.progress.adam.second_moment}}},
      {"rng", {{"dirichlet", ck.progress.dirichlet_rng}, {"shuffle", ck.progress.shuffle_rng}}},
      {"progress", {{"epoch", ck.progress.epochs_done}, {"batch", 0}}},
  };
  return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
  Checkpoint ck;
  try {
    const json doc = json::parse(text);
    ck.format_version = doc.at("format_version").get<int>();
    if (ck.format_version != kCheckpointFormatVersion)
      throw FormatError("unsupported checkpoint format_version " + std::to_string(ck.format_version));
    ck.config = config_from_json(doc.at("config"));
    const auto& arch = doc.at("architecture");
    ck.architecture.mode = parse_train_mode(doc.at("mode").get<std::string>());
    ck.architecture.k = arch.at("k").get<std::size_t>();
    ck.architecture.width = arch.at("width").get<std::size_t>();
    ck.architecture.hidden_layers = arch.at("hidden_layers").get<std::size_t>();
    ck.architecture.head = toy::parse_output_head(arch.at("head").get<std::string>());
    if (arch.at("input_dim").get<std::size_t>() != ck.architecture.input_dim())
      throw FormatError("checkpoint input_dim does not match its mode");
    if (ck.architecture.mode != ck.config.experiment.train.mode)
      throw FormatError("checkpoint mode does not match its config");
    if (ck.architecture.head != ck.config.experiment.head)
      throw FormatError("checkpoint output head does not match its config");
    for (const auto& p : doc.at("parameters")) {
      StoredArray a{p.at("name").get<std::string>(), p.at("shape").get<Shape>(), p.at("values").get<std::vector<double>>()};
      if (shape_size(a.shape) != a.values.size())
        throw FormatError("checkpoint array '" + a.name + "' has " + std::to_string(a.values.size()) +
                          " values for shape " + shape_string(a.shape));
      ck.parameters.push_back(std::move(a));
    }
    const auto& adam = doc.at("adam");
    ck.progress.adam.step = adam.at("step").get<std::uint64_t>();
    ck.progress.adam.first_moment = adam.at("first_moment").get<std::vector<std::vector<double>>>();
    ck.progress.adam.second_moment = adam.at("second_moment").get<std::vector<std::vector<double>>>();
    ck.progress.dirichlet_rng = doc.at("rng").at("dirichlet").get<std::string>();
    ck.progress.shuffle_rng = doc.at("rng").at("shuffle").get<std::string>();
    ck.progress.epochs_done = doc.at("progress").at("epoch").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  } catch (const UsageError& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  } catch (const DomainError& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
  // Validates parameter counts against the architecture.
  restore_model(ck);
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  auto out = open_output(path);
  out << checkpoint_to_string(ck);
  if (!out) throw FormatError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace symparam
