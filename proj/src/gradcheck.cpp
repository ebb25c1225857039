#include "symparam/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "symparam/errors.hpp"

namespace symparam {

double GradCheckResult::max_rel_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.rel_error);
  return worst;
}

GradCheckResult check_gradients(const std::function<Tensor(Tape&)>& loss,
                                std::span<NamedTensor> wrt, double step) {
  for (auto& w : wrt) {
    if (!w.tensor.requires_grad()) throw UsageError("gradient check on " + w.name + " which does not require grad");
    w.tensor.zero_grad();
  }
  {
    Tape tape;
    tape.backward(loss(tape));
  }

  auto evaluate = [&] {
    Tape tape;
    return loss(tape).item();
  };

  GradCheckResult result;
  for (auto& w : wrt) {
    const std::vector<double> analytic = w.tensor.has_grad()
        ? std::vector<double>(w.tensor.grad().begin(), w.tensor.grad().end())
        : std::vector<double>(w.tensor.size(), 0.0);
    auto values = w.tensor.mutable_data();
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = evaluate();
      values[i] = saved - step;
      const double down = evaluate();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      diff2 += (analytic[i] - numeric) * (analytic[i] - numeric);
      a2 += analytic[i] * analytic[i];
      n2 += numeric * numeric;
    }
    const double denom = std::sqrt(std::max(a2, n2));
    const double diff = std::sqrt(diff2);
    // Vanishing gradients are compared absolutely.
    result.entries.push_back({w.name, denom < 1e-9 ? diff : diff / denom});
  }
  return result;
}

}  // namespace symparam
