#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <cmath>
#include <cstddef>
#include <vector>

#include "symparam/simplex.hpp"

namespace oracle {

// Plain scalar Adam, written out per element.
struct ScalarAdam {
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<double> m, v;
  int t = 0;

  void step(std::vector<double>& p, const std::vector<double>& g, double lr) {
    if (m.empty()) {
      m.assign(p.size(), 0.0);
      v.assign(p.size(), 0.0);
    }
    ++t;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      const double mh = m[i] / (1.0 - std::pow(beta1, t));
      const double vh = v[i] / (1.0 - std::pow(beta2, t));
      p[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
};

struct MomentCheck {
  double mean = 0.0;
  double variance = 0.0;
  bool all_on_simplex = true;
};

// Moments of s_1 over `n` draws.
inline MomentCheck dirichlet_moments(const symparam::Concentration& alpha, std::size_t n, symparam::Rng& rng,
                                     std::vector<double>* first = nullptr) {
  MomentCheck out;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = symparam::sample_dirichlet(alpha, rng);
    double total = 0.0;
    for (double v : s.values()) {
      if (!(v >= 0.0)) out.all_on_simplex = false;
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) out.all_on_simplex = false;
    sum += s[0];
    sum2 += s[0] * s[0];
    if (first) first->push_back(s[0]);
  }
  out.mean = sum / static_cast<double>(n);
  out.variance = sum2 / static_cast<double>(n) - out.mean * out.mean;
  return out;
}

struct BinCheck {
  std::size_t bin = 0;
  double observed = 0.0;
  double expected = 0.0;
  double sigma = 0.0;
  bool ok() const { return std::abs(observed - expected) <= 3.0 * sigma; }
};

// Histogram of s_1 for k = 2 on `bins` equal bins of [0, 1]; expected counts
// integrate exp(dirichlet_log_pdf) by composite Simpson. The two edge bins
// hold the integrable singularities of α < 1 and are skipped.
inline std::vector<BinCheck> dirichlet_histogram(const std::vector<double>& draws,
                                                 const symparam::Concentration& alpha, std::size_t bins) {
  std::vector<double> counts(bins, 0.0);
  for (double s : draws) {
    auto b = static_cast<std::size_t>(s * static_cast<double>(bins));
    if (b >= bins) b = bins - 1;
    counts[b] += 1.0;
  }
  auto pdf = [&](double s) { return std::exp(symparam::dirichlet_log_pdf(symparam::SymParameter({s, 1.0 - s}), alpha)); };
  const double n = static_cast<double>(draws.size());
  std::vector<BinCheck> out;
  for (std::size_t b = 1; b + 1 < bins; ++b) {
    const double lo = static_cast<double>(b) / bins, hi = static_cast<double>(b + 1) / bins;
    const int steps = 200;
    const double hstep = (hi - lo) / steps;
    double acc = pdf(lo) + pdf(hi);
    for (int i = 1; i < steps; ++i) acc += (i % 2 ? 4.0 : 2.0) * pdf(lo + i * hstep);
    const double p = acc * hstep / 3.0;
    out.push_back({b, counts[b], n * p, std::sqrt(n * p * (1.0 - p))});
  }
  return out;
}

}  // namespace oracle
