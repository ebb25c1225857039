#pragma once

// Dense inner loops behind the tensor ops and the landscape grid.
//
// Every kernel exists twice: `serial` is the reference used by tests and
// `omp` splits the outer loop across OpenMP threads. Both accumulate each
// output element in the same order, so their results are bit-identical.

#include <cstddef>
#include <span>

namespace symparam::kernels {

struct LandscapeTerms {
  std::span<const double> reg_target;  // per x column
  std::span<const double> cls_target;  // per x column, 0 or 1
  double w_reg = 1.0;
  double w_cls = 0.0;
  double cls_scale = 1.0;
  double clamp_eps = 1e-6;
};

namespace serial {
// c[m×p] = a[m×n] · b[n×p]
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t n, std::size_t p);
// out[n×p] += aᵀ · g, a is m×n, g is m×p
void matmul_at_b_acc(std::span<const double> a, std::span<const double> g, std::span<double> out,
                     std::size_t m, std::size_t n, std::size_t p);
// out[m×n] += g · bᵀ, g is m×p, b is n×p
void matmul_a_bt_acc(std::span<const double> g, std::span<const double> b, std::span<double> out,
                     std::size_t m, std::size_t n, std::size_t p);
// out[ny×nx], row 0 is the last (largest) y value.
void landscape(const LandscapeTerms& terms, std::span<const double> y_grid, std::span<double> out);
}  // namespace serial

namespace omp {
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t n, std::size_t p);
void matmul_at_b_acc(std::span<const double> a, std::span<const double> g, std::span<double> out,
                     std::size_t m, std::size_t n, std::size_t p);
void matmul_a_bt_acc(std::span<const double> g, std::span<const double> b, std::span<double> out,
                     std::size_t m, std::size_t n, std::size_t p);
void landscape(const LandscapeTerms& terms, std::span<const double> y_grid, std::span<double> out);
}  // namespace omp

// Work size (multiply-adds) above which the dispatchers below use the
// OpenMP kernels. Toy-model batches stay below it.
inline constexpr std::size_t kParallelThreshold = std::size_t{1} << 18;

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t n, std::size_t p);
void matmul_at_b_acc(std::span<const double> a, std::span<const double> g, std::span<double> out,
                     std::size_t m, std::size_t n, std::size_t p);
void matmul_a_bt_acc(std::span<const double> g, std::span<const double> b, std::span<double> out,
                     std::size_t m, std::size_t n, std::size_t p);
void landscape(const LandscapeTerms& terms, std::span<const double> y_grid, std::span<double> out);

// Binary cross entropy of a single clamped prediction.
double clamped_bce(double pred, double target, double clamp_eps);

}  // namespace symparam::kernels
