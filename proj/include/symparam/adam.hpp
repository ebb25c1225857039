#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "symparam/tensor.hpp"

namespace symparam {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::uint64_t step = 0;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

// Bias-corrected Adam update of `params` in place. Moment buffers are sized
// on the first call and must match the parameter shapes afterwards.
void adam_step(std::span<Tensor> params, std::span<const std::vector<double>> grads, AdamState& state,
               double lr, const AdamConfig& config);

// Same, reading each parameter's accumulated gradient (absent means zero).
void adam_step(std::span<Tensor> params, AdamState& state, double lr, const AdamConfig& config);

}  // namespace symparam
