#include "symparam/ops.hpp"

#include <algorithm>
#include <cmath>

#include "symparam/errors.hpp"
#include "symparam/kernels.hpp"

namespace symparam {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank)
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(t.shape()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), n = a.dim(1), p = b.dim(1);
  if (b.dim(0) != n)
    throw DimensionError("matmul: inner dimensions " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  std::vector<double> out(m * p);
  kernels::matmul(a.data(), b.data(), out, m, n, p);
  return tape.record("matmul", {m, p}, std::move(out), {a, b},
                     [a, b, m, n, p](std::span<const double> g) {
                       if (a.requires_grad()) kernels::matmul_a_bt_acc(g, b.data(), grad_buffer(a), m, n, p);
                       if (b.requires_grad()) kernels::matmul_at_b_acc(a.data(), g, grad_buffer(b), m, n, p);
                     });
}

Tensor dense(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank(x, 2, "dense");
  require_rank(weight, 2, "dense");
  const std::size_t rows = x.dim(0), n = x.dim(1), m = weight.dim(1);
  if (weight.dim(0) != n)
    throw DimensionError("dense: input " + shape_string(x.shape()) + " vs weight " +
                         shape_string(weight.shape()));
  if (bias.size() != m)
    throw DimensionError("dense: bias " + shape_string(bias.shape()) + " vs " + std::to_string(m) +
                         " outputs");
  std::vector<double> out(rows * m);
  kernels::matmul(x.data(), weight.data(), out, rows, n, m);
  const auto bv = bias.data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < m; ++j) out[r * m + j] += bv[j];
  return tape.record("dense", {rows, m}, std::move(out), {x, weight, bias},
                     [x, weight, bias, rows, n, m](std::span<const double> g) {
                       if (x.requires_grad())
                         kernels::matmul_a_bt_acc(g, weight.data(), grad_buffer(x), rows, n, m);
                       if (weight.requires_grad())
                         kernels::matmul_at_b_acc(x.data(), g, grad_buffer(weight), rows, n, m);
                       if (bias.requires_grad()) {
                         auto gb = grad_buffer(bias);
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t j = 0; j < m; ++j) gb[j] += g[r * m + j];
                       }
                     });
}

Tensor activation(Tape& tape, const Tensor& x, Activation kind) {
  const auto in = x.data();
  std::vector<double> out(in.size());
  switch (kind) {
    case Activation::relu:
      std::transform(in.begin(), in.end(), out.begin(), [](double v) { return v > 0 ? v : 0.0; });
      break;
    case Activation::sigmoid:
      std::transform(in.begin(), in.end(), out.begin(), sigmoid);
      break;
    case Activation::tanh:
      std::transform(in.begin(), in.end(), out.begin(), [](double v) { return std::tanh(v); });
      break;
  }
  // Derivatives are expressed through the output, which the closure keeps.
  auto y = std::make_shared<std::vector<double>>(out);
  return tape.record("activation", x.shape(), std::move(out), {x},
                     [x, y, kind](std::span<const double> g) {
                       auto gx = grad_buffer(x);
                       const auto& yv = *y;
                       for (std::size_t i = 0; i < gx.size(); ++i) {
                         double d = 0.0;
                         switch (kind) {
                           case Activation::relu: d = yv[i] > 0 ? 1.0 : 0.0; break;
                           case Activation::sigmoid: d = yv[i] * (1.0 - yv[i]); break;
                           case Activation::tanh: d = 1.0 - yv[i] * yv[i]; break;
                         }
                         gx[i] += g[i] * d;
                       }
                     });
}

Tensor global_avg_pool(Tape& tape, const Tensor& features) {
  require_rank(features, 3, "global_avg_pool");
  const std::size_t h = features.dim(0), w = features.dim(1), c = features.dim(2);
  if (h == 0 || w == 0) throw DimensionError("global_avg_pool: empty spatial extent");
  const std::size_t positions = h * w;
  const auto in = features.data();
  std::vector<double> out(c, 0.0);
  for (std::size_t p = 0; p < positions; ++p)
    for (std::size_t ch = 0; ch < c; ++ch) out[ch] += in[p * c + ch];
  for (auto& v : out) v /= static_cast<double>(positions);
  return tape.record("global_avg_pool", {1, 1, c}, std::move(out), {features},
                     [features, positions, c](std::span<const double> g) {
                       auto gx = grad_buffer(features);
                       const double inv = 1.0 / static_cast<double>(positions);
                       for (std::size_t p = 0; p < positions; ++p)
                         for (std::size_t ch = 0; ch < c; ++ch) gx[p * c + ch] += g[ch] * inv;
                     });
}

Tensor channel_scale(Tape& tape, const Tensor& features, const Tensor& gates) {
  require_rank(features, 3, "channel_scale");
  const std::size_t c = features.dim(2);
  if (gates.size() != c)
    throw DimensionError("channel_scale: " + std::to_string(gates.size()) + " gates for " +
                         std::to_string(c) + " channels");
  const std::size_t positions = features.dim(0) * features.dim(1);
  const auto x = features.data();
  const auto m = gates.data();
  std::vector<double> out(x.size());
  for (std::size_t p = 0; p < positions; ++p)
    for (std::size_t ch = 0; ch < c; ++ch) out[p * c + ch] = x[p * c + ch] * m[ch];
  return tape.record("channel_scale", features.shape(), std::move(out), {features, gates},
                     [features, gates, positions, c](std::span<const double> g) {
                       const auto x = features.data();
                       const auto m = gates.data();
                       if (features.requires_grad()) {
                         auto gx = grad_buffer(features);
                         for (std::size_t p = 0; p < positions; ++p)
                           for (std::size_t ch = 0; ch < c; ++ch) gx[p * c + ch] += g[p * c + ch] * m[ch];
                       }
                       if (gates.requires_grad()) {
                         auto gm = grad_buffer(gates);
                         for (std::size_t p = 0; p < positions; ++p)
                           for (std::size_t ch = 0; ch < c; ++ch) gm[ch] += g[p * c + ch] * x[p * c + ch];
                       }
                     });
}

Tensor concat_last(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.rank() == 0 || a.rank() != b.rank() ||
      !std::equal(a.shape().begin(), a.shape().end() - 1, b.shape().begin()))
    throw DimensionError("concat_last: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  const std::size_t ca = a.shape().back(), cb = b.shape().back();
  const std::size_t rows = ca + cb == 0 ? 0 : (a.size() + b.size()) / (ca + cb);
  Shape shape = a.shape();
  shape.back() = ca + cb;
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  const auto av = a.data(), bv = b.data();
  for (std::size_t r = 0; r < rows; ++r) {
    out.insert(out.end(), av.begin() + static_cast<std::ptrdiff_t>(r * ca),
               av.begin() + static_cast<std::ptrdiff_t>((r + 1) * ca));
    out.insert(out.end(), bv.begin() + static_cast<std::ptrdiff_t>(r * cb),
               bv.begin() + static_cast<std::ptrdiff_t>((r + 1) * cb));
  }
  return tape.record("concat_last", std::move(shape), std::move(out), {a, b},
                     [a, b, rows, ca, cb](std::span<const double> g) {
                       const std::size_t width = ca + cb;
                       if (a.requires_grad()) {
                         auto ga = grad_buffer(a);
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t j = 0; j < ca; ++j) ga[r * ca + j] += g[r * width + j];
                       }
                       if (b.requires_grad()) {
                         auto gb = grad_buffer(b);
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t j = 0; j < cb; ++j) gb[r * cb + j] += g[r * width + ca + j];
                       }
                     });
}

Tensor reshape(Tape& tape, const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size())
    throw DimensionError("reshape: " + shape_string(x.shape()) + " to " + shape_string(shape));
  return tape.record("reshape", std::move(shape), std::vector<double>(x.data().begin(), x.data().end()),
                     {x}, [x](std::span<const double> g) {
                       auto gx = grad_buffer(x);
                       for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i];
                     });
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  std::transform(a.data().begin(), a.data().end(), b.data().begin(), out.begin(), std::plus<>{});
  return tape.record("add", a.shape(), std::move(out), {a, b}, [a, b](std::span<const double> g) {
    for (const Tensor* t : {&a, &b}) {
      if (!t->requires_grad()) continue;
      auto gt = grad_buffer(*t);
      for (std::size_t i = 0; i < gt.size(); ++i) gt[i] += g[i];
    }
  });
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  std::transform(a.data().begin(), a.data().end(), b.data().begin(), out.begin(), std::multiplies<>{});
  return tape.record("mul", a.shape(), std::move(out), {a, b}, [a, b](std::span<const double> g) {
    if (a.requires_grad()) {
      auto ga = grad_buffer(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * b.at(i);
    }
    if (b.requires_grad()) {
      auto gb = grad_buffer(b);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * a.at(i);
    }
  });
}

Tensor scale(Tape& tape, const Tensor& x, double factor) {
  std::vector<double> out(x.size());
  std::transform(x.data().begin(), x.data().end(), out.begin(), [factor](double v) { return v * factor; });
  return tape.record("scale", x.shape(), std::move(out), {x}, [x, factor](std::span<const double> g) {
    auto gx = grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * factor;
  });
}

Tensor sum(Tape& tape, const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  return tape.record("sum", {1}, {acc}, {x}, [x](std::span<const double> g) {
    auto gx = grad_buffer(x);
    for (auto& v : gx) v += g[0];
  });
}

Tensor mean(Tape& tape, const Tensor& x) {
  if (x.size() == 0) throw DimensionError("mean of empty tensor");
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  const double n = static_cast<double>(x.size());
  return tape.record("mean", {1}, {acc / n}, {x}, [x, n](std::span<const double> g) {
    auto gx = grad_buffer(x);
    for (auto& v : gx) v += g[0] / n;
  });
}

Tensor weighted_sum(Tape& tape, std::span<const Tensor> terms, std::span<const double> weights) {
  if (terms.size() != weights.size() || terms.empty())
    throw DimensionError("weighted_sum: " + std::to_string(terms.size()) + " terms, " +
                         std::to_string(weights.size()) + " weights");
  double acc = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].size() != 1) throw DimensionError("weighted_sum: terms must be scalars");
    acc += weights[i] * terms[i].item();
  }
  std::vector<Tensor> inputs(terms.begin(), terms.end());
  std::vector<double> w(weights.begin(), weights.end());
  return tape.record("weighted_sum", {1}, {acc}, inputs, [inputs, w](std::span<const double> g) {
    for (std::size_t i = 0; i < inputs.size(); ++i)
      if (inputs[i].requires_grad()) grad_buffer(inputs[i])[0] += g[0] * w[i];
  });
}

Tensor squared_error(Tape& tape, const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "squared_error");
  const auto p = pred.data(), t = target.data();
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = (p[i] - t[i]) * (p[i] - t[i]);
  return tape.record("squared_error", pred.shape(), std::move(out), {pred, target},
                     [pred, target](std::span<const double> g) {
                       const auto p = pred.data(), t = target.data();
                       if (pred.requires_grad()) {
                         auto gp = grad_buffer(pred);
                         for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[i] * 2.0 * (p[i] - t[i]);
                       }
                       if (target.requires_grad()) {
                         auto gt = grad_buffer(target);
                         for (std::size_t i = 0; i < gt.size(); ++i) gt[i] -= g[i] * 2.0 * (p[i] - t[i]);
                       }
                     });
}

Tensor binary_cross_entropy(Tape& tape, const Tensor& pred, const Tensor& target, double clamp_eps) {
  require_same_shape(pred, target, "binary_cross_entropy");
  if (!(clamp_eps > 0.0 && clamp_eps < 0.5)) throw DomainError("bce clamp_eps must be in (0, 0.5)");
  const auto p = pred.data(), t = target.data();
  for (double v : t)
    if (v != 0.0 && v != 1.0) throw DomainError("binary_cross_entropy: target " + std::to_string(v) + " is not 0 or 1");
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = kernels::clamped_bce(p[i], t[i], clamp_eps);
  return tape.record("binary_cross_entropy", pred.shape(), std::move(out), {pred},
                     [pred, target, clamp_eps](std::span<const double> g) {
                       const auto p = pred.data(), t = target.data();
                       auto gp = grad_buffer(pred);
                       for (std::size_t i = 0; i < gp.size(); ++i) {
                         if (p[i] < clamp_eps || p[i] > 1.0 - clamp_eps) continue;
                         gp[i] += g[i] * (-t[i] / p[i] + (1.0 - t[i]) / (1.0 - p[i]));
                       }
                     });
}

Tensor mse_loss(Tape& tape, const Tensor& pred, const Tensor& target) {
  return mean(tape, squared_error(tape, pred, target));
}

Tensor bce_loss(Tape& tape, const Tensor& pred, const Tensor& target, double clamp_eps) {
  return mean(tape, binary_cross_entropy(tape, pred, target, clamp_eps));
}

}  // namespace symparam
