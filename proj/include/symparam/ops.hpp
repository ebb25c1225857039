#pragma once

// Differentiable operations. Each op computes its forward value eagerly and,
// when an input requires a gradient, records its backward rule on the tape.

#include <span>

#include "symparam/tensor.hpp"

namespace symparam {

enum class Activation { relu, sigmoid, tanh };

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
// x[b×n] · W[n×m] + bias[m], bias broadcast over rows.
Tensor dense(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor activation(Tape& tape, const Tensor& x, Activation kind);

// H×W×C -> 1×1×C spatial mean.
Tensor global_avg_pool(Tape& tape, const Tensor& features);
// out[h,w,c] = X[h,w,c] · M[c]; M holds C values (any shape, e.g. 1×1×C).
Tensor channel_scale(Tape& tape, const Tensor& features, const Tensor& gates);

// Concatenates along the last axis; leading extents must agree.
Tensor concat_last(Tape& tape, const Tensor& a, const Tensor& b);
Tensor reshape(Tape& tape, const Tensor& x, Shape shape);

Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape& tape, const Tensor& x, double factor);
Tensor sum(Tape& tape, const Tensor& x);
Tensor mean(Tape& tape, const Tensor& x);
// Σ w_i · terms_i over scalar tensors, constant weights.
Tensor weighted_sum(Tape& tape, std::span<const Tensor> terms, std::span<const double> weights);

// Per-element (pred − target)².
Tensor squared_error(Tape& tape, const Tensor& pred, const Tensor& target);
// Per-element −[t·log p + (1−t)·log(1−p)] with p = clamp(pred, eps, 1−eps).
// The clamp passes no gradient outside [eps, 1−eps].
Tensor binary_cross_entropy(Tape& tape, const Tensor& pred, const Tensor& target, double clamp_eps);

Tensor mse_loss(Tape& tape, const Tensor& pred, const Tensor& target);
Tensor bce_loss(Tape& tape, const Tensor& pred, const Tensor& target, double clamp_eps = 1e-6);

}  // namespace symparam
