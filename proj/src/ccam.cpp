#include "symparam/ccam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "symparam/adam.hpp"
#include "symparam/csv.hpp"
#include "symparam/errors.hpp"
#include "symparam/ops.hpp"

namespace symparam {

namespace {

NamedTensor uniform_param(const std::string& name, Shape shape, std::size_t fan_in, Rng& init) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> v(shape_size(shape));
  for (auto& x : v) x = dist(init);
  return {name, Tensor(std::move(shape), std::move(v), true)};
}

Tensor sym_tensor(const SymParameter& s) {
  return Tensor({1, s.k()}, std::vector<double>(s.values().begin(), s.values().end()));
}

}  // namespace

CcamLayer::CcamLayer(std::size_t channels, std::size_t k, std::size_t reduction, Rng& init)
    : channels_(channels), k_(k), reduction_(reduction) {
  if (channels_ < 1 || k_ < 1 || reduction_ < 1) throw UsageError("ccam: channels, k and reduction must be positive");
  bottleneck_ = std::max<std::size_t>(1, (channels_ + reduction_ - 1) / reduction_);
  params_.push_back(uniform_param("embed.weight", {k_, channels_}, k_, init));
  params_.push_back(uniform_param("embed.bias", {channels_}, k_, init));
  params_.push_back(uniform_param("squeeze.weight", {2 * channels_, bottleneck_}, 2 * channels_, init));
  params_.push_back(uniform_param("squeeze.bias", {bottleneck_}, 2 * channels_, init));
  params_.push_back(uniform_param("excite.weight", {bottleneck_, channels_}, bottleneck_, init));
  params_.push_back(uniform_param("excite.bias", {channels_}, bottleneck_, init));
}

Tensor& CcamLayer::parameter(const std::string& name) {
  for (auto& p : params_)
    if (p.name == name) return p.tensor;
  throw UsageError("ccam has no parameter '" + name + "'");
}

CcamLayer::Output CcamLayer::forward(Tape& tape, const Tensor& features, const Tensor& s) const {
  if (features.rank() != 3 || features.dim(2) != channels_)
    throw UsageError("ccam: expected H×W×" + std::to_string(channels_) + " features, got " +
                     shape_string(features.shape()));
  if (s.size() != k_)
    throw UsageError("ccam: expected " + std::to_string(k_) + " sym-parameter values, got " + std::to_string(s.size()));
  const Tensor pooled = reshape(tape, global_avg_pool(tape, features), {1, channels_});
  const Tensor embedded =
      activation(tape, dense(tape, reshape(tape, s, {1, k_}), params_[0].tensor, params_[1].tensor), Activation::relu);
  const Tensor joint = concat_last(tape, embedded, pooled);
  const Tensor squeezed = activation(tape, dense(tape, joint, params_[2].tensor, params_[3].tensor), Activation::relu);
  const Tensor gates =
      activation(tape, dense(tape, squeezed, params_[4].tensor, params_[5].tensor), Activation::sigmoid);
  const Tensor attention = reshape(tape, gates, {1, 1, channels_});
  return {channel_scale(tape, features, attention), attention};
}

CcamLayer::Output CcamLayer::forward(Tape& tape, const Tensor& features, const SymParameter& s) const {
  return forward(tape, features, sym_tensor(s));
}

Tensor concat_inject(Tape& tape, const Tensor& features, const SymParameter& s) {
  if (features.rank() != 3) throw UsageError("concat_inject: expected H×W×C features");
  const std::size_t positions = features.dim(0) * features.dim(1);
  std::vector<double> planes;
  planes.reserve(positions * s.k());
  for (std::size_t p = 0; p < positions; ++p) planes.insert(planes.end(), s.values().begin(), s.values().end());
  return concat_last(tape, features, Tensor({features.dim(0), features.dim(1), s.k()}, std::move(planes)));
}

double AttentionTable::max_spread() const {
  double spread = 0.0;
  for (std::size_t c = 0; c < channel_min.size(); ++c) spread = std::max(spread, channel_max[c] - channel_min[c]);
  return spread;
}

AttentionTable ccam_sensitivity(const CcamLayer& layer, const Tensor& features, const std::vector<SymParameter>& grid) {
  AttentionTable table;
  table.channel_min.assign(layer.channels(), 1.0);
  table.channel_max.assign(layer.channels(), 0.0);
  for (const auto& s : grid) {
    Tape tape;
    const auto out = layer.forward(tape, features, s);
    std::vector<double> gates(out.attention.data().begin(), out.attention.data().end());
    for (std::size_t c = 0; c < gates.size(); ++c) {
      table.channel_min[c] = std::min(table.channel_min[c], gates[c]);
      table.channel_max[c] = std::max(table.channel_max[c], gates[c]);
    }
    table.conditions.push_back(s);
    table.gates.push_back(std::move(gates));
  }
  return table;
}

void write_attention_csv(std::ostream& os, const AttentionTable& table) {
  if (table.conditions.empty()) return;
  const std::size_t k = table.conditions.front().k();
  const std::size_t c = table.gates.front().size();
  for (std::size_t i = 0; i < k; ++i) os << (i ? "," : "") << "s_" << (i + 1);
  for (std::size_t i = 0; i < c; ++i) os << ",M_" << (i + 1);
  os << '\n';
  for (std::size_t r = 0; r < table.conditions.size(); ++r) {
    std::vector<double> row(table.conditions[r].values().begin(), table.conditions[r].values().end());
    row.insert(row.end(), table.gates[r].begin(), table.gates[r].end());
    write_csv_row(os, row);
  }
}

std::vector<SymParameter> simplex_grid(std::size_t k, std::size_t divisions) {
  if (k < 1 || divisions < 1) throw UsageError("simplex grid needs k >= 1 and divisions >= 1");
  std::vector<SymParameter> out;
  std::vector<std::size_t> counts(k, 0);
  // Enumerate compositions of `divisions` into k non-negative parts.
  auto recurse = [&](auto&& self, std::size_t index, std::size_t remaining) -> void {
    if (index + 1 == k) {
      counts[index] = remaining;
      std::vector<double> v(k);
      for (std::size_t i = 0; i < k; ++i) v[i] = static_cast<double>(counts[i]) / static_cast<double>(divisions);
      out.push_back(SymParameter(std::move(v)));
      return;
    }
    for (std::size_t c = remaining + 1; c-- > 0;) {
      counts[index] = c;
      self(self, index + 1, remaining - c);
    }
  };
  recurse(recurse, 0, divisions);
  return out;
}

namespace {

Tensor random_features(std::size_t h, std::size_t w, std::size_t c, Rng& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(h * w * c);
  for (auto& x : v) x = dist(rng);
  return Tensor({h, w, c}, std::move(v));
}

}  // namespace

GradCheckResult ccam_gradient_check(std::uint64_t seed, std::size_t height, std::size_t width, std::size_t channels,
                                    std::size_t k, std::size_t reduction) {
  Rng init = make_stream(seed, "gradcheck-init");
  Rng data = make_stream(seed, "gradcheck-data");
  CcamLayer layer(channels, k, reduction, init);
  Tensor features = random_features(height, width, channels, data);
  features.set_requires_grad(true);
  const auto s0 = sample_dirichlet(Concentration(std::vector<double>(k, 1.0)), data);
  Tensor s({1, k}, std::vector<double>(s0.values().begin(), s0.values().end()), true);

  std::vector<NamedTensor> wrt{{"X", features}, {"S", s}};
  for (const auto& p : layer.parameters()) wrt.push_back(p);
  return check_gradients([&](Tape& tape) { return sum(tape, layer.forward(tape, features, s).features); }, wrt);
}

namespace {

struct ProbeSample {
  Tensor features;
  SymParameter s;
  Tensor target;  // (H·W)×C
};

struct LinearHead {
  Tensor weight;
  Tensor bias;
};

LinearHead make_head(std::size_t in, std::size_t out, Rng& init) {
  auto w = uniform_param("head.weight", {in, out}, in, init);
  auto b = uniform_param("head.bias", {out}, in, init);
  return {w.tensor, b.tensor};
}

// Per-sample squared error of one model variant, averaged over the batch.
template <typename Predict>
double train_and_test(const std::vector<ProbeSample>& train, const std::vector<ProbeSample>& test,
                      std::vector<Tensor> params, const Predict& predict, const CcamProbeConfig& cfg,
                      const std::string& stream) {
  Rng shuffle = make_stream(cfg.seed, stream);
  AdamState adam;
  std::vector<std::size_t> order(train.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Step decay shaped like the toy recipe: 2/5 at lr, 2/5 at lr/10, 1/5 at lr/100.
    double lr = cfg.learning_rate;
    if (5 * epoch >= 4 * cfg.epochs) lr *= 0.01;
    else if (5 * epoch >= 2 * cfg.epochs) lr *= 0.1;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), shuffle);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t rows = std::min(cfg.batch_size, order.size() - start);
      for (auto& p : params) p.zero_grad();
      Tape tape;
      std::vector<Tensor> losses;
      for (std::size_t r = 0; r < rows; ++r) {
        const auto& smp = train[order[start + r]];
        losses.push_back(mse_loss(tape, predict(tape, smp), smp.target));
      }
      const std::vector<double> weights(rows, 1.0 / static_cast<double>(rows));
      tape.backward(weighted_sum(tape, losses, weights));
      adam_step(params, adam, lr, AdamConfig{});
    }
  }
  double acc = 0.0;
  for (const auto& smp : test) {
    Tape tape;
    acc += mse_loss(tape, predict(tape, smp), smp.target).item();
  }
  return acc / static_cast<double>(test.size());
}

}  // namespace

CcamProbeResult run_ccam_probe(const CcamProbeConfig& cfg) {
  if (cfg.train_samples < 1 || cfg.test_samples < 1 || cfg.batch_size < 1)
    throw UsageError("ccam probe needs non-empty data and a positive batch size");
  const std::size_t positions = cfg.height * cfg.width;
  const std::size_t c = cfg.channels;

  Rng task = make_stream(cfg.seed, "probe-task");
  std::vector<double> mix(cfg.k * c), offset(c);
  for (auto& v : mix) v = cfg.mask_scale * standard_normal(task);
  for (auto& v : offset) v = standard_normal(task);
  auto true_mask = [&](const SymParameter& s) {
    std::vector<double> m(c);
    for (std::size_t ch = 0; ch < c; ++ch) {
      double z = offset[ch];
      for (std::size_t j = 0; j < cfg.k; ++j) z += mix[j * c + ch] * s[j];
      m[ch] = 1.0 / (1.0 + std::exp(-z));
    }
    return m;
  };

  Rng data = make_stream(cfg.seed, "probe-data");
  const Concentration uniform(std::vector<double>(cfg.k, 1.0));
  auto make_samples = [&](std::size_t n) {
    std::vector<ProbeSample> out;
    for (std::size_t i = 0; i < n; ++i) {
      Tensor x = random_features(cfg.height, cfg.width, c, data);
      auto s = sample_dirichlet(uniform, data);
      const auto m = true_mask(s);
      std::vector<double> t(positions * c);
      for (std::size_t p = 0; p < positions; ++p)
        for (std::size_t ch = 0; ch < c; ++ch) t[p * c + ch] = x.at(p * c + ch) * m[ch];
      out.push_back({x, s, Tensor({positions, c}, std::move(t))});
    }
    return out;
  };
  const auto train = make_samples(cfg.train_samples);
  const auto test = make_samples(cfg.test_samples);

  Rng init = make_stream(cfg.seed, "probe-init");
  CcamLayer layer(c, cfg.k, cfg.reduction, init);
  const LinearHead ccam_head = make_head(c, c, init);
  const LinearHead concat_head = make_head(c + cfg.k, c, init);

  std::vector<Tensor> ccam_params{ccam_head.weight, ccam_head.bias};
  for (const auto& p : layer.parameters()) ccam_params.push_back(p.tensor);

  CcamProbeResult result;
  result.ccam_mse = train_and_test(
      train, test, ccam_params,
      [&](Tape& tape, const ProbeSample& smp) {
        const auto gated = layer.forward(tape, smp.features, smp.s).features;
        return dense(tape, reshape(tape, gated, {positions, c}), ccam_head.weight, ccam_head.bias);
      },
      cfg, "probe-shuffle-ccam");
  result.concat_mse = train_and_test(
      train, test, {concat_head.weight, concat_head.bias},
      [&](Tape& tape, const ProbeSample& smp) {
        const auto joined = concat_inject(tape, smp.features, smp.s);
        return dense(tape, reshape(tape, joined, {positions, c + cfg.k}), concat_head.weight, concat_head.bias);
      },
      cfg, "probe-shuffle-concat");

  result.table = ccam_sensitivity(layer, test.front().features, simplex_grid(cfg.k, 4));
  result.gradients = ccam_gradient_check(cfg.seed, cfg.height, cfg.width, c, cfg.k, cfg.reduction);
  return result;
}

}  // namespace symparam
