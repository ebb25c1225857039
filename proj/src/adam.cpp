#include "symparam/adam.hpp"

#include <cmath>

#include "symparam/errors.hpp"

namespace symparam {

void adam_step(std::span<Tensor> params, std::span<const std::vector<double>> grads, AdamState& state,
               double lr, const AdamConfig& config) {
  if (grads.size() != params.size()) throw DimensionError("adam: parameter and gradient counts differ");
  if (state.first_moment.empty() && state.step == 0) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), 0.0);
      state.second_moment.emplace_back(p.size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size())
    throw DimensionError("adam: state holds " + std::to_string(state.first_moment.size()) +
                         " parameters, got " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i].size() || state.first_moment[i].size() != params[i].size() ||
        state.second_moment[i].size() != params[i].size())
      throw DimensionError("adam: shape mismatch for parameter " + std::to_string(i));
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto values = params[i].mutable_data();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    const auto& g = grads[i];
    for (std::size_t j = 0; j < values.size(); ++j) {
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g[j];
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      values[j] -= lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
}

void adam_step(std::span<Tensor> params, AdamState& state, double lr, const AdamConfig& config) {
  std::vector<std::vector<double>> grads;
  grads.reserve(params.size());
  for (const auto& p : params) {
    if (p.has_grad()) grads.emplace_back(p.grad().begin(), p.grad().end());
    else grads.emplace_back(p.size(), 0.0);
  }
  adam_step(params, grads, state, lr, config);
}

}  // namespace symparam
