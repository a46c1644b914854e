#pragma once

#include <vector>

#include "ssdm/tensor.hpp"

namespace ssdm {

struct AdamWConfig {
  double learning_rate = 1e-4;
  double weight_decay = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Decoupled weight decay Adam. Moment buffers are allocated per parameter at
// construction and match the parameter shapes.
template <typename T>
class AdamW {
 public:
  AdamW(std::vector<Tensor<T>> params, AdamWConfig cfg);

  // Applies one update from the parameters' accumulated gradients.
  // Throws ValidationError if any parameter has no gradient.
  void step();
  void zero_grad();

  int64_t step_count() const { return step_; }
  const AdamWConfig& config() const { return cfg_; }
  std::vector<Tensor<T>>& params() { return params_; }

 private:
  std::vector<Tensor<T>> params_;
  AdamWConfig cfg_;
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
  int64_t step_ = 0;
};

extern template class AdamW<float>;
extern template class AdamW<double>;

}  // namespace ssdm
