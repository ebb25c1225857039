#include "symparam/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "symparam/errors.hpp"

namespace symparam {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : node_(std::make_shared<detail::Node>()) {
  if (std::find(shape.begin(), shape.end(), std::size_t{0}) != shape.end() && !data.empty())
    throw DimensionError("zero extent with non-empty data");
  if (shape_size(shape) != data.size())
    throw DimensionError("shape " + shape_string(shape) + " does not match " +
                         std::to_string(data.size()) + " values");
  node_->shape = std::move(shape);
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const auto n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::filled(Shape shape, double value) {
  const auto n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

double Tensor::item() const {
  if (size() != 1) throw UsageError("item() on tensor of shape " + shape_string(shape()));
  return node_->data[0];
}

Tensor Tensor::clone() const { return Tensor(shape(), node_->data, requires_grad()); }

Tensor Tensor::detach() const { return Tensor(shape(), node_->data, false); }

std::span<double> grad_buffer(const Tensor& t) {
  auto& node = *t.node();
  if (node.grad.empty()) node.grad.assign(node.data.size(), 0.0);
  return node.grad;
}

Tensor Tape::record(const char* op, Shape shape, std::vector<double> data,
                    const std::vector<Tensor>& inputs, BackwardFn backward) {
  for (double v : data) {
    if (!std::isfinite(v)) throw NumericalError(std::string("non-finite value produced by ") + op);
  }
  const bool needs_grad =
      std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
  Tensor out(std::move(shape), std::move(data), needs_grad);
  if (needs_grad) {
    if (consumed_) throw UsageError("recording on a tape that was already differentiated; call reset()");
    ops_.push_back(Op{op, out.node(), std::move(backward)});
  }
  return out;
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw UsageError("backward called twice on the same tape without reset()");
  if (!loss.defined() || loss.size() != 1)
    throw UsageError("backward needs a scalar loss");
  const auto it = std::find_if(ops_.begin(), ops_.end(),
                               [&](const Op& op) { return op.output == loss.node(); });
  if (it == ops_.end()) throw UsageError("loss was not produced on this tape");

  consumed_ = true;
  loss.node()->grad.assign(1, 1.0);
  for (auto op = std::make_reverse_iterator(it + 1); op != ops_.rend(); ++op) {
    if (op->output->grad.empty()) continue;  // unreachable from the loss
    op->backward(op->output->grad);
  }
}

void Tape::reset() {
  ops_.clear();
  consumed_ = false;
}

}  // namespace symparam
