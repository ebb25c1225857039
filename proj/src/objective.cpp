#include "symparam/objective.hpp"

#include <set>

#include "symparam/errors.hpp"
#include "symparam/ops.hpp"

namespace symparam {

WeightedObjective::WeightedObjective(std::vector<LossTerm> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw UsageError("objective needs at least one loss term");
  std::set<std::string> seen;
  for (const auto& t : terms_) {
    if (!t.loss) throw UsageError("loss term '" + t.name + "' has no loss function");
    if (!seen.insert(t.name).second) throw UsageError("duplicate loss term name '" + t.name + "'");
  }
}

std::vector<std::string> WeightedObjective::names() const {
  std::vector<std::string> out;
  for (const auto& t : terms_) out.push_back(t.name);
  return out;
}

std::vector<double> CombinedLoss::term_values() const {
  std::vector<double> out;
  for (const auto& t : terms) out.push_back(t.item());
  return out;
}

Tensor target_column(const Tensor& targets, std::size_t col) {
  if (targets.rank() != 2 || col >= targets.dim(1))
    throw DimensionError("target column " + std::to_string(col) + " of " + shape_string(targets.shape()));
  const std::size_t rows = targets.dim(0), width = targets.dim(1);
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = targets.at(r * width + col);
  return Tensor({rows, 1}, std::move(out));
}

CombinedLoss combine_losses(Tape& tape, const WeightedObjective& objective, const SymParameter& s,
                            const Tensor& outputs, const Tensor& targets) {
  if (s.k() != objective.k())
    throw UsageError("sym-parameter has " + std::to_string(s.k()) + " components for " +
                     std::to_string(objective.k()) + " loss terms");
  CombinedLoss out;
  for (const auto& term : objective.terms())
    out.terms.push_back(mean(tape, term.loss(tape, outputs, target_column(targets, term.target_column))));
  out.total = weighted_sum(tape, out.terms, s.values());
  return out;
}

CombinedLoss combine_losses_per_example(Tape& tape, const WeightedObjective& objective,
                                        const Tensor& weights, const Tensor& outputs,
                                        const Tensor& targets) {
  if (weights.rank() != 2 || weights.dim(1) != objective.k() || weights.dim(0) != outputs.dim(0))
    throw UsageError("per-example weights " + shape_string(weights.shape()) + " do not match " +
                     std::to_string(outputs.dim(0)) + " samples and " + std::to_string(objective.k()) +
                     " loss terms");
  CombinedLoss out;
  std::vector<Tensor> weighted;
  for (std::size_t i = 0; i < objective.k(); ++i) {
    const auto& term = objective.terms()[i];
    const Tensor per_sample = term.loss(tape, outputs, target_column(targets, term.target_column));
    out.terms.push_back(mean(tape, per_sample));
    weighted.push_back(mean(tape, mul(tape, per_sample, target_column(weights, i))));
  }
  const std::vector<double> ones(weighted.size(), 1.0);
  out.total = weighted_sum(tape, weighted, ones);
  return out;
}

}  // namespace symparam
