#pragma once

// Sym-parameters: points on the probability simplex that both condition the
// model and weight its loss terms, plus the Dirichlet law they are drawn from.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "symparam/rng.hpp"

namespace symparam {

inline constexpr double kSimplexTolerance = 1e-9;

class SymParameter {
 public:
  // Requires s_i >= 0 and |Σ s_i − 1| <= kSimplexTolerance.
  explicit SymParameter(std::vector<double> values);
  // No simplex validation; for extrapolation at inference, e.g. (0, 1.5, 0).
  static SymParameter unchecked(std::vector<double> values);
  static SymParameter one_hot(std::size_t k, std::size_t index);

  std::size_t k() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_.at(i); }
  bool on_simplex() const;
  std::string to_string() const;

  friend bool operator==(const SymParameter&, const SymParameter&) = default;

 private:
  struct NoCheck {};
  SymParameter(std::vector<double> values, NoCheck) : values_(std::move(values)) {}
  std::vector<double> values_;
};

class Concentration {
 public:
  explicit Concentration(std::vector<double> alpha);
  std::size_t k() const noexcept { return alpha_.size(); }
  std::span<const double> values() const noexcept { return alpha_; }
  double total() const;

  friend bool operator==(const Concentration&, const Concentration&) = default;

 private:
  std::vector<double> alpha_;
};

// Gamma(shape, 1) variate by the Marsaglia–Tsang squeeze method; shapes below
// one use the Gamma(shape + 1)·U^(1/shape) boost. Returned in log space so
// that tiny shapes do not underflow.
double log_gamma_variate(double shape, Rng& rng);
double gamma_variate(double shape, Rng& rng);

// k independent Gamma(α_i, 1) draws, normalized.
SymParameter sample_dirichlet(const Concentration& alpha, Rng& rng);

// log p(s) = Σ (α_i − 1) log s_i − log B(α),  B(α) = Π Γ(α_i) / Γ(Σ α_i).
// Boundary points are a DomainError when any zero coordinate has α_i < 1.
double dirichlet_log_pdf(const SymParameter& s, const Concentration& alpha);
double log_multivariate_beta(const Concentration& alpha);

}  // namespace symparam
