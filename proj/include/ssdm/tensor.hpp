#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ssdm/errors.hpp"

namespace ssdm {

using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& shape);
std::string format_shape(const Shape& shape);
bool same_shape(const Shape& a, const Shape& b);

namespace detail {

// One node of the recorded computation graph. Holds the forward value and,
// once backward() has run, the accumulated gradient. `backward_fn` reads
// this node's grad and scatters into the parents' grads.
template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // empty until needed; value.size() once allocated
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  int64_t numel() const { return static_cast<int64_t>(value.size()); }

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
  }
};

// Graph recording is on by default; NoGradGuard turns it off for a scope
// (evaluation passes and finite-difference probes).
bool grad_enabled();
void set_grad_enabled(bool enabled);

}  // namespace detail

struct NoGradGuard {
  NoGradGuard() : prev_(detail::grad_enabled()) { detail::set_grad_enabled(false); }
  ~NoGradGuard() { detail::set_grad_enabled(prev_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

// Dense row-major nd-array with optional recorded gradient. Copying a Tensor
// copies the handle, not the storage; ops never mutate their inputs.
template <typename T>
class Tensor {
 public:
  using NodePtr = std::shared_ptr<detail::Node<T>>;

  Tensor() = default;
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    return filled(std::move(shape), T(0), requires_grad);
  }

  static Tensor filled(Shape shape, T value, bool requires_grad = false) {
    auto node = std::make_shared<detail::Node<T>>();
    node->value.assign(static_cast<size_t>(shape_numel(shape)), value);
    node->shape = std::move(shape);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
  }

  static Tensor from_data(Shape shape, std::vector<T> data, bool requires_grad = false) {
    if (shape_numel(shape) != static_cast<int64_t>(data.size())) {
      throw DimensionError("tensor data length " + std::to_string(data.size()) +
                           " does not match shape " + format_shape(shape));
    }
    auto node = std::make_shared<detail::Node<T>>();
    node->shape = std::move(shape);
    node->value = std::move(data);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
  }

  static Tensor scalar(T value, bool requires_grad = false) {
    return from_data({1}, {value}, requires_grad);
  }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int64_t ndim() const { return static_cast<int64_t>(node_->shape.size()); }
  int64_t dim(int64_t i) const { return node_->shape.at(static_cast<size_t>(i)); }
  int64_t numel() const { return node_->numel(); }

  std::span<const T> values() const { return node_->value; }
  std::span<T> mutable_values() { return node_->value; }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool flag) { node_->requires_grad = flag; }

  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const T> grad() const {
    if (node_->grad.empty()) {
      throw ValidationError("tensor has no gradient; run backward() first");
    }
    return node_->grad;
  }
  void zero_grad() {
    if (node_->requires_grad) node_->ensure_grad();
    std::fill(node_->grad.begin(), node_->grad.end(), T(0));
  }

  T item() const {
    if (numel() != 1) {
      throw ValidationError("item() requires a scalar tensor, got shape " +
                            format_shape(shape()));
    }
    return node_->value[0];
  }

  // Reverse-mode sweep from a scalar result. Seeds d(self)/d(self)=1 and
  // accumulates gradients into every upstream node with requires_grad.
  void backward() const;

  // Same storage, different shape. Participates in the graph (gradient is
  // reshaped back).
  Tensor reshape(Shape new_shape) const;

  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace ssdm
