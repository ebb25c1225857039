#include "symparam/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace symparam::kernels {

double clamped_bce(double pred, double target, double clamp_eps) {
  const double p = std::clamp(pred, clamp_eps, 1.0 - clamp_eps);
  return -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
}

namespace {

inline void matmul_row(const double* a, const double* b, double* c, std::size_t n, std::size_t p) {
  std::fill(c, c + p, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double aik = a[k];
    const double* brow = b + k * p;
    for (std::size_t j = 0; j < p; ++j) c[j] += aik * brow[j];
  }
}

inline void at_b_row(const double* a, const double* g, double* out, std::size_t r, std::size_t m,
                     std::size_t n, std::size_t p) {
  for (std::size_t i = 0; i < m; ++i) {
    const double air = a[i * n + r];
    const double* grow = g + i * p;
    for (std::size_t j = 0; j < p; ++j) out[j] += air * grow[j];
  }
}

inline void a_bt_row(const double* g, const double* b, double* out, std::size_t n, std::size_t p) {
  for (std::size_t j = 0; j < n; ++j) {
    const double* brow = b + j * p;
    double acc = 0.0;
    for (std::size_t k = 0; k < p; ++k) acc += g[k] * brow[k];
    out[j] += acc;
  }
}

inline void landscape_column(const LandscapeTerms& t, std::span<const double> y_grid,
                             std::span<double> out, std::size_t col) {
  const std::size_t nx = t.reg_target.size();
  const std::size_t ny = y_grid.size();
  for (std::size_t row = 0; row < ny; ++row) {
    const double y = y_grid[ny - 1 - row];
    const double d = y - t.reg_target[col];
    double v = 0.0;
    if (t.w_reg != 0.0) v += t.w_reg * d * d;
    if (t.w_cls != 0.0) v += t.w_cls * t.cls_scale * clamped_bce(y, t.cls_target[col], t.clamp_eps);
    out[row * nx + col] = v;
  }
}

}  // namespace

namespace serial {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t n, std::size_t p) {
  for (std::size_t i = 0; i < m; ++i) matmul_row(a.data() + i * n, b.data(), c.data() + i * p, n, p);
}

void matmul_at_b_acc(std::span<const double> a, std::span<const double> g, std::span<double> out,
                     std::size_t m, std::size_t n, std::size_t p) {
  for (std::size_t r = 0; r < n; ++r) at_b_row(a.data(), g.data(), out.data() + r * p, r, m, n, p);
}

void matmul_a_bt_acc(std::span<const double> g, std::span<const double> b, std::span<double> out,
                     std::size_t m, std::size_t n, std::size_t p) {
  for (std::size_t i = 0; i < m; ++i) a_bt_row(g.data() + i * p, b.data(), out.data() + i * n, n, p);
}

void landscape(const LandscapeTerms& terms, std::span<const double> y_grid, std::span<double> out) {
  for (std::size_t col = 0; col < terms.reg_target.size(); ++col) landscape_column(terms, y_grid, out, col);
}

}  // namespace serial

namespace omp {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t n, std::size_t p) {
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    matmul_row(a.data() + ii * n, b.data(), c.data() + ii * p, n, p);
  }
}

void matmul_at_b_acc(std::span<const double> a, std::span<const double> g, std::span<double> out,
                     std::size_t m, std::size_t n, std::size_t p) {
  const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    const auto rr = static_cast<std::size_t>(r);
    at_b_row(a.data(), g.data(), out.data() + rr * p, rr, m, n, p);
  }
}

void matmul_a_bt_acc(std::span<const double> g, std::span<const double> b, std::span<double> out,
                     std::size_t m, std::size_t n, std::size_t p) {
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    a_bt_row(g.data() + ii * p, b.data(), out.data() + ii * n, n, p);
  }
}

void landscape(const LandscapeTerms& terms, std::span<const double> y_grid, std::span<double> out) {
  const auto cols = static_cast<std::int64_t>(terms.reg_target.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t col = 0; col < cols; ++col)
    landscape_column(terms, y_grid, out, static_cast<std::size_t>(col));
}

}  // namespace omp

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t n, std::size_t p) {
  if (m * n * p >= kParallelThreshold) omp::matmul(a, b, c, m, n, p);
  else serial::matmul(a, b, c, m, n, p);
}

void matmul_at_b_acc(std::span<const double> a, std::span<const double> g, std::span<double> out,
                     std::size_t m, std::size_t n, std::size_t p) {
  if (m * n * p >= kParallelThreshold) omp::matmul_at_b_acc(a, g, out, m, n, p);
  else serial::matmul_at_b_acc(a, g, out, m, n, p);
}

void matmul_a_bt_acc(std::span<const double> g, std::span<const double> b, std::span<double> out,
                     std::size_t m, std::size_t n, std::size_t p) {
  if (m * n * p >= kParallelThreshold) omp::matmul_a_bt_acc(g, b, out, m, n, p);
  else serial::matmul_a_bt_acc(g, b, out, m, n, p);
}

void landscape(const LandscapeTerms& terms, std::span<const double> y_grid, std::span<double> out) {
  if (terms.reg_target.size() * y_grid.size() >= 4096) omp::landscape(terms, y_grid, out);
  else serial::landscape(terms, y_grid, out);
}

}  // namespace symparam::kernels
