#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "symparam/simplex.hpp"
#include "symparam/tensor.hpp"

namespace symparam {

// Builds per-sample losses (b×1) from predictions (b×1) and one target column (b×1).
using PerSampleLoss = std::function<Tensor(Tape&, const Tensor& pred, const Tensor& target)>;

struct LossTerm {
  std::string name;
  PerSampleLoss loss;
  std::size_t target_column = 0;
};

// Ordered loss terms L_1..L_k combined as Σ s_i · L_i.
class WeightedObjective {
 public:
  explicit WeightedObjective(std::vector<LossTerm> terms);

  std::size_t k() const noexcept { return terms_.size(); }
  const std::vector<LossTerm>& terms() const noexcept { return terms_; }
  std::vector<std::string> names() const;

 private:
  std::vector<LossTerm> terms_;
};

struct CombinedLoss {
  Tensor total;
  std::vector<Tensor> terms;  // unweighted batch means, one scalar per term
  std::vector<double> term_values() const;
};

// Σ s_i · mean_b ℓ_i(b). One-hot s reproduces the selected term exactly.
CombinedLoss combine_losses(Tape& tape, const WeightedObjective& objective, const SymParameter& s,
                            const Tensor& outputs, const Tensor& targets);

// mean_b Σ_i w[b,i] · ℓ_i(b) with a b×k weight matrix (one simplex point per sample).
CombinedLoss combine_losses_per_example(Tape& tape, const WeightedObjective& objective,
                                        const Tensor& weights, const Tensor& outputs,
                                        const Tensor& targets);

// Column `col` of a b×t matrix as a b×1 constant.
Tensor target_column(const Tensor& targets, std::size_t col);

}  // namespace symparam
