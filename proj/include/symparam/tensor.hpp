#pragma once

// Dense row-major tensors and the define-by-run tape that differentiates them.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace symparam {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {
struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a gradient arrives
  bool requires_grad = false;
};
}  // namespace detail

// Handle to a tensor node. Copies share storage; use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value);
  static Tensor scalar(double value);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t size() const { return node_->data.size(); }

  std::span<const double> data() const { return node_->data; }
  // Writable view for leaves (optimizer updates, perturbation in gradient checks).
  std::span<double> mutable_data() { return node_->data; }
  double item() const;
  double at(std::size_t i) const { return node_->data.at(i); }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const double> grad() const { return node_->grad; }
  void zero_grad() { node_->grad.clear(); }

  Tensor clone() const;
  Tensor detach() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

// Ordered record of executed ops. Ops are appended during the forward pass
// (so every op's inputs precede it) and replayed in reverse by backward().
class Tape {
 public:
  // Receives the gradient of the op output; accumulates into input grads.
  using BackwardFn = std::function<void(std::span<const double> out_grad)>;

  // Wraps a forward result. Records it when any input requires a gradient;
  // otherwise returns a plain constant. Raises NumericalError on NaN/Inf.
  Tensor record(const char* op, Shape shape, std::vector<double> data,
                const std::vector<Tensor>& inputs, BackwardFn backward);

  // Seeds d(loss)/d(loss) = 1 and propagates to every requires_grad leaf.
  // A tape can be differentiated once; reset() makes it reusable.
  void backward(const Tensor& loss);
  void reset();

  std::size_t size() const noexcept { return ops_.size(); }
  bool consumed() const noexcept { return consumed_; }

 private:
  struct Op {
    const char* name;
    std::shared_ptr<detail::Node> output;
    BackwardFn backward;
  };
  std::vector<Op> ops_;
  bool consumed_ = false;
};

// Gradient buffer of `t`, allocated as zeros on first use.
std::span<double> grad_buffer(const Tensor& t);

}  // namespace symparam
