#include "symparam/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "symparam/errors.hpp"

namespace symparam {

SymParameter::SymParameter(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("sym-parameter needs at least one component");
  if (!on_simplex()) throw DomainError("sym-parameter " + to_string() + " is not on the simplex");
}

SymParameter SymParameter::unchecked(std::vector<double> values) {
  if (values.empty()) throw DomainError("sym-parameter needs at least one component");
  for (double v : values)
    if (!std::isfinite(v)) throw DomainError("sym-parameter component is not finite");
  return SymParameter(std::move(values), NoCheck{});
}

SymParameter SymParameter::one_hot(std::size_t k, std::size_t index) {
  if (index >= k) throw DomainError("one_hot index out of range");
  std::vector<double> v(k, 0.0);
  v[index] = 1.0;
  return SymParameter(std::move(v));
}

bool SymParameter::on_simplex() const {
  double total = 0.0;
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
    total += v;
  }
  return std::abs(total - 1.0) <= kSimplexTolerance;
}

std::string SymParameter::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < values_.size(); ++i) os << (i ? ", " : "") << values_[i];
  os << ')';
  return os.str();
}

Concentration::Concentration(std::vector<double> alpha) : alpha_(std::move(alpha)) {
  if (alpha_.empty()) throw DomainError("concentration needs at least one component");
  for (double a : alpha_)
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("concentration entries must be positive and finite");
}

double Concentration::total() const { return std::accumulate(alpha_.begin(), alpha_.end(), 0.0); }

double log_gamma_variate(double shape, Rng& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("gamma shape must be positive");
  if (shape < 1.0) {
    const double boosted = log_gamma_variate(shape + 1.0, rng);
    return boosted + std::log(uniform_open01(rng)) / shape;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0, v = 0.0;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open01(rng);
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
  }
}

double gamma_variate(double shape, Rng& rng) { return std::exp(log_gamma_variate(shape, rng)); }

SymParameter sample_dirichlet(const Concentration& alpha, Rng& rng) {
  std::vector<double> logs(alpha.k());
  for (std::size_t i = 0; i < logs.size(); ++i) logs[i] = log_gamma_variate(alpha.values()[i], rng);
  const double top = *std::max_element(logs.begin(), logs.end());
  double total = 0.0;
  for (auto& l : logs) {
    l = std::exp(l - top);
    total += l;
  }
  for (auto& l : logs) l /= total;
  return SymParameter(std::move(logs));
}

double log_multivariate_beta(const Concentration& alpha) {
  double acc = 0.0;
  for (double a : alpha.values()) acc += std::lgamma(a);
  return acc - std::lgamma(alpha.total());
}

double dirichlet_log_pdf(const SymParameter& s, const Concentration& alpha) {
  if (s.k() != alpha.k())
    throw DimensionError("dirichlet_log_pdf: point has " + std::to_string(s.k()) +
                         " components, concentration " + std::to_string(alpha.k()));
  if (!s.on_simplex()) throw DomainError("dirichlet_log_pdf: " + s.to_string() + " is not on the simplex");
  double acc = -log_multivariate_beta(alpha);
  for (std::size_t i = 0; i < s.k(); ++i) {
    const double a = alpha.values()[i];
    const double v = s[i];
    if (v == 0.0) {
      if (a < 1.0) throw DomainError("dirichlet density diverges on the boundary for alpha < 1");
      if (a > 1.0) return -std::numeric_limits<double>::infinity();
      continue;
    }
    acc += (a - 1.0) * std::log(v);
  }
  return acc;
}

}  // namespace symparam
