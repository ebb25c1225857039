#pragma once

// Central finite-difference check of tape gradients. Only forward passes
// feed the numeric estimate, so it is independent of the backward rules.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "symparam/tensor.hpp"

namespace symparam {

struct GradCheckEntry {
  std::string name;
  double rel_error = 0.0;  // ||analytic − numeric|| / max(||analytic||, ||numeric||)
};

struct GradCheckResult {
  std::vector<GradCheckEntry> entries;
  double max_rel_error() const;
  bool passed(double tol) const { return max_rel_error() < tol; }
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// `loss` builds a scalar on the tape it is given, reading the current values
// of the tensors in `wrt`. Each tensor in `wrt` must require a gradient.
GradCheckResult check_gradients(const std::function<Tensor(Tape&)>& loss,
                                std::span<NamedTensor> wrt, double step = 1e-5);

}  // namespace symparam
