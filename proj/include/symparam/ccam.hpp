#pragma once

// Conditional channel attention: M = σ(MLP_m([MLP_e(S), AvgPool(X)])),
// output X ⊗ M, plus the constant-plane concatenation baseline.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "symparam/gradcheck.hpp"
#include "symparam/rng.hpp"
#include "symparam/simplex.hpp"
#include "symparam/tensor.hpp"

namespace symparam {

class CcamLayer {
 public:
  // MLP_e: k → C (ReLU). MLP_m: 2C → ceil(C/r) (ReLU) → C (sigmoid).
  // Parameters uniform in ±1/√fan_in.
  CcamLayer(std::size_t channels, std::size_t k, std::size_t reduction, Rng& init);

  struct Output {
    Tensor features;   // H×W×C
    Tensor attention;  // 1×1×C, entries in (0, 1)
  };

  // `s` holds k values (any shape); it may require a gradient.
  Output forward(Tape& tape, const Tensor& features, const Tensor& s) const;
  Output forward(Tape& tape, const Tensor& features, const SymParameter& s) const;

  std::size_t channels() const noexcept { return channels_; }
  std::size_t k() const noexcept { return k_; }
  std::size_t reduction() const noexcept { return reduction_; }
  std::size_t bottleneck() const noexcept { return bottleneck_; }

  // embed.{weight,bias}, squeeze.{weight,bias}, excite.{weight,bias}
  std::vector<NamedTensor> parameters() const { return params_; }
  Tensor& parameter(const std::string& name);

 private:
  std::size_t channels_, k_, reduction_, bottleneck_;
  std::vector<NamedTensor> params_;
};

// H×W×C features with k constant planes appended, plane j filled with s_j.
Tensor concat_inject(Tape& tape, const Tensor& features, const SymParameter& s);

struct AttentionTable {
  std::vector<SymParameter> conditions;
  std::vector<std::vector<double>> gates;  // one row of C gates per condition
  std::vector<double> channel_min;
  std::vector<double> channel_max;
  double max_spread() const;  // max over channels of (max − min)
};

AttentionTable ccam_sensitivity(const CcamLayer& layer, const Tensor& features,
                                const std::vector<SymParameter>& grid);

// Columns s_1..s_k,M_1..M_C.
void write_attention_csv(std::ostream& os, const AttentionTable& table);

// Gradient check of sum(CCAM(X, S)) against X, S and every parameter.
GradCheckResult ccam_gradient_check(std::uint64_t seed, std::size_t height = 4, std::size_t width = 4,
                                    std::size_t channels = 8, std::size_t k = 3, std::size_t reduction = 4);

// Synthetic conditioning task: targets are X gated per channel by a fixed
// S-dependent mask σ(A·S + b). A CCAM followed by a per-position linear head
// is compared with concat_inject feeding the same kind of head.
struct CcamProbeConfig {
  std::uint64_t seed = 0;
  std::size_t height = 4;
  std::size_t width = 4;
  std::size_t channels = 64;
  std::size_t k = 3;
  std::size_t reduction = 4;
  std::size_t train_samples = 1024;
  std::size_t test_samples = 128;
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  double learning_rate = 0.01;
  double mask_scale = 3.0;
};

struct CcamProbeResult {
  double ccam_mse = 0.0;
  double concat_mse = 0.0;
  AttentionTable table;  // trained layer over a grid of conditions
  GradCheckResult gradients;
};

CcamProbeResult run_ccam_probe(const CcamProbeConfig& config);

// Simplex grid with step 1/divisions (all compositions of `divisions` into k parts).
std::vector<SymParameter> simplex_grid(std::size_t k, std::size_t divisions);

}  // namespace symparam
