#pragma once

// Randomized finite-difference checks for every differentiable op.
// Each trial draws fresh shapes and values in [-2, 2] and differentiates
// sum(op(...) ⊙ R) for a random constant R, so every output element carries
// a distinct weight.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "symparam/gradcheck.hpp"
#include "symparam/ops.hpp"
#include "symparam/rng.hpp"

namespace gradsuite {

using namespace symparam;

struct OpReport {
  std::string op;
  int trials = 0;
  double worst = 0.0;
};

class Draw {
 public:
  explicit Draw(Rng& rng) : rng_(rng) {}

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(rng_); }
  std::size_t extent(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(uniform01(rng_) * static_cast<double>(hi - lo + 1));
  }
  std::vector<double> values(std::size_t n, double lo = -2.0, double hi = 2.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(lo, hi);
    return v;
  }
  // Values in [-2, 2] kept away from the ReLU kink.
  std::vector<double> off_kink(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) {
      do x = uniform(-2.0, 2.0);
      while (std::abs(x) < 1e-2);
    }
    return v;
  }
  std::vector<double> labels(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform01(rng_) < 0.5 ? 0.0 : 1.0;
    return v;
  }
  Tensor leaf(Shape shape) {
    const auto n = shape_size(shape);
    return Tensor(std::move(shape), values(n), true);
  }
  Tensor constant(Shape shape) {
    const auto n = shape_size(shape);
    return Tensor(std::move(shape), values(n));
  }

 private:
  Rng& rng_;
};

inline Tensor weighted(Tape& t, const Tensor& out, const Tensor& r) { return sum(t, mul(t, out, r)); }

inline double check(std::vector<NamedTensor> wrt, const std::function<Tensor(Tape&)>& loss) {
  return check_gradients(loss, wrt).max_rel_error();
}

using Trial = std::function<double(Draw&)>;

inline std::vector<std::pair<std::string, Trial>> trials() {
  std::vector<std::pair<std::string, Trial>> out;
  out.emplace_back("matmul", [](Draw& d) {
    const auto m = d.extent(1, 4), n = d.extent(1, 4), p = d.extent(1, 4);
    auto a = d.leaf({m, n});
    auto b = d.leaf({n, p});
    auto r = d.constant({m, p});
    return check({{"a", a}, {"b", b}}, [&](Tape& t) { return weighted(t, matmul(t, a, b), r); });
  });
  out.emplace_back("dense", [](Draw& d) {
    const auto b = d.extent(1, 4), n = d.extent(1, 4), m = d.extent(1, 4);
    auto x = d.leaf({b, n});
    auto w = d.leaf({n, m});
    auto bias = d.leaf({m});
    auto r = d.constant({b, m});
    return check({{"x", x}, {"W", w}, {"bias", bias}}, [&](Tape& t) { return weighted(t, dense(t, x, w, bias), r); });
  });
  for (auto [name, kind] : {std::pair{"relu", Activation::relu}, std::pair{"sigmoid", Activation::sigmoid},
                            std::pair{"tanh", Activation::tanh}}) {
    out.emplace_back(name, [kind = kind](Draw& d) {
      const auto n = d.extent(1, 12);
      auto x = Tensor({n}, d.off_kink(n), true);
      auto r = d.constant({n});
      return check({{"x", x}}, [&](Tape& t) { return weighted(t, activation(t, x, kind), r); });
    });
  }
  out.emplace_back("global_avg_pool", [](Draw& d) {
    const auto h = d.extent(1, 4), w = d.extent(1, 4), c = d.extent(1, 4);
    auto x = d.leaf({h, w, c});
    auto r = d.constant({1, 1, c});
    return check({{"X", x}}, [&](Tape& t) { return weighted(t, global_avg_pool(t, x), r); });
  });
  out.emplace_back("channel_scale", [](Draw& d) {
    const auto h = d.extent(1, 3), w = d.extent(1, 3), c = d.extent(1, 4);
    auto x = d.leaf({h, w, c});
    auto m = d.leaf({1, 1, c});
    auto r = d.constant({h, w, c});
    return check({{"X", x}, {"M", m}}, [&](Tape& t) { return weighted(t, channel_scale(t, x, m), r); });
  });
  out.emplace_back("concat_last", [](Draw& d) {
    const auto h = d.extent(1, 3), ca = d.extent(1, 3), cb = d.extent(1, 3);
    auto a = d.leaf({h, ca});
    auto b = d.leaf({h, cb});
    auto r = d.constant({h, ca + cb});
    return check({{"a", a}, {"b", b}}, [&](Tape& t) { return weighted(t, concat_last(t, a, b), r); });
  });
  out.emplace_back("reshape", [](Draw& d) {
    const auto m = d.extent(1, 4), n = d.extent(1, 4);
    auto a = d.leaf({m, n});
    auto r = d.constant({n, m});
    return check({{"a", a}}, [&](Tape& t) { return weighted(t, reshape(t, a, {n, m}), r); });
  });
  out.emplace_back("add", [](Draw& d) {
    const auto n = d.extent(1, 8);
    auto a = d.leaf({n});
    auto b = d.leaf({n});
    auto r = d.constant({n});
    return check({{"a", a}, {"b", b}}, [&](Tape& t) { return weighted(t, add(t, a, b), r); });
  });
  out.emplace_back("mul", [](Draw& d) {
    const auto n = d.extent(1, 8);
    auto a = d.leaf({n});
    auto b = d.leaf({n});
    auto r = d.constant({n});
    return check({{"a", a}, {"b", b}}, [&](Tape& t) { return weighted(t, mul(t, a, b), r); });
  });
  out.emplace_back("scale", [](Draw& d) {
    const auto n = d.extent(1, 8);
    auto a = d.leaf({n});
    const double f = d.uniform(-2.0, 2.0);
    auto r = d.constant({n});
    return check({{"a", a}}, [&](Tape& t) { return weighted(t, scale(t, a, f), r); });
  });
  out.emplace_back("sum", [](Draw& d) {
    const auto n = d.extent(1, 8);
    auto a = d.leaf({n});
    const double r = d.uniform(-2.0, 2.0);
    // squared so the gradient depends on the value
    return check({{"a", a}}, [&](Tape& t) {
      auto s = sum(t, a);
      return scale(t, mul(t, s, s), r);
    });
  });
  out.emplace_back("mean", [](Draw& d) {
    const auto n = d.extent(1, 8);
    auto a = d.leaf({n});
    return check({{"a", a}}, [&](Tape& t) {
      auto s = mean(t, a);
      return mul(t, s, s);
    });
  });
  out.emplace_back("weighted_sum", [](Draw& d) {
    const auto k = d.extent(1, 4);
    std::vector<Tensor> leaves;
    std::vector<NamedTensor> wrt;
    for (std::size_t i = 0; i < k; ++i) {
      leaves.push_back(d.leaf({3}));
      wrt.push_back({"term" + std::to_string(i), leaves.back()});
    }
    const auto w = d.values(k);
    return check(wrt, [&](Tape& t) {
      std::vector<Tensor> terms;
      for (const auto& l : leaves) terms.push_back(sum(t, mul(t, l, l)));
      return weighted_sum(t, terms, w);
    });
  });
  out.emplace_back("squared_error", [](Draw& d) {
    const auto n = d.extent(1, 8);
    auto p = d.leaf({n});
    auto y = d.leaf({n});
    auto r = d.constant({n});
    return check({{"pred", p}, {"target", y}}, [&](Tape& t) { return weighted(t, squared_error(t, p, y), r); });
  });
  out.emplace_back("mse_loss", [](Draw& d) {
    const auto m = d.extent(1, 5), n = d.extent(1, 3);
    auto p = d.leaf({m, n});
    auto y = d.leaf({m, n});
    return check({{"pred", p}, {"target", y}}, [&](Tape& t) { return mse_loss(t, p, y); });
  });
  // BCE is only differentiable inside the clamp, i.e. for predictions in (0, 1).
  out.emplace_back("binary_cross_entropy", [](Draw& d) {
    const auto n = d.extent(1, 8);
    auto p = Tensor({n}, d.values(n, 0.02, 0.98), true);
    auto y = Tensor({n}, d.labels(n));
    auto r = d.constant({n});
    return check({{"pred", p}}, [&](Tape& t) { return weighted(t, binary_cross_entropy(t, p, y, 1e-6), r); });
  });
  out.emplace_back("bce_loss", [](Draw& d) {
    const auto n = d.extent(1, 8);
    auto p = Tensor({n, 1}, d.values(n, 0.02, 0.98), true);
    auto y = Tensor({n, 1}, d.labels(n));
    return check({{"pred", p}}, [&](Tape& t) { return bce_loss(t, p, y); });
  });
  return out;
}

inline std::vector<OpReport> run(int trials_per_op, std::uint64_t seed) {
  std::vector<OpReport> reports;
  for (auto& [name, trial] : trials()) {
    Rng rng = make_stream(seed, "gradcheck-" + name);
    Draw draw(rng);
    OpReport rep{name, trials_per_op, 0.0};
    for (int i = 0; i < trials_per_op; ++i) rep.worst = std::max(rep.worst, trial(draw));
    reports.push_back(rep);
  }
  return reports;
}

}  // namespace gradsuite
