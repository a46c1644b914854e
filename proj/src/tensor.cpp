#include "ssdm/tensor.hpp"

#include <algorithm>
#include <unordered_set>

namespace ssdm {

int64_t shape_numel(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d < 0) throw DimensionError("negative dimension in shape " + format_shape(shape));
    n *= d;
  }
  return n;
}

std::string format_shape(const Shape& shape) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

bool same_shape(const Shape& a, const Shape& b) { return a == b; }

namespace detail {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }
void set_grad_enabled(bool enabled) { g_grad_enabled = enabled; }

}  // namespace detail

template <typename T>
void Tensor<T>::backward() const {
  if (!node_) throw ValidationError("backward() on an undefined tensor");
  if (numel() != 1) {
    throw ValidationError("backward() requires a scalar loss, got shape " +
                          format_shape(shape()));
  }

  // Iterative post-order DFS; graphs from long training steps are deep enough
  // that recursion is not safe.
  using NodeT = detail::Node<T>;
  std::vector<NodeT*> order;
  std::unordered_set<NodeT*> visited;
  std::vector<std::pair<NodeT*, size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      NodeT* parent = node->parents[next++].get();
      if (visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  node_->ensure_grad();
  node_->grad[0] = T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeT* node = *it;
    if (!node->backward_fn) continue;
    if (node->grad.empty()) continue;  // nothing flowed into this node
    for (auto& parent : node->parents) {
      if (parent->requires_grad) parent->ensure_grad();
    }
    node->backward_fn(*node);
  }
}

template <typename T>
Tensor<T> Tensor<T>::reshape(Shape new_shape) const {
  if (shape_numel(new_shape) != numel()) {
    throw DimensionError("cannot reshape " + format_shape(shape()) + " to " +
                         format_shape(new_shape));
  }
  auto out = std::make_shared<detail::Node<T>>();
  out->shape = std::move(new_shape);
  out->value = node_->value;
  if (detail::grad_enabled() && node_->requires_grad) {
    out->requires_grad = true;
    out->parents = {node_};
    out->backward_fn = [](detail::Node<T>& self) {
      auto& parent = *self.parents[0];
      if (!parent.requires_grad) return;
      for (size_t i = 0; i < self.grad.size(); ++i) parent.grad[i] += self.grad[i];
    };
  }
  return Tensor(std::move(out));
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace ssdm
