#include "ssdm/optim.hpp"

#include <cmath>

namespace ssdm {

template <typename T>
AdamW<T>::AdamW(std::vector<Tensor<T>> params, AdamWConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (auto& p : params_) {
    m_.emplace_back(static_cast<size_t>(p.numel()), T(0));
    v_.emplace_back(static_cast<size_t>(p.numel()), T(0));
  }
}

template <typename T>
void AdamW<T>::step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    if (!p.has_grad()) {
      throw ValidationError("adamw_step: parameter " + std::to_string(i) +
                            " has no gradient");
    }
    const auto g = p.grad();
    auto vals = p.mutable_values();
    auto& m = m_[i];
    auto& v = v_[i];
    for (size_t j = 0; j < vals.size(); ++j) {
      const double gj = static_cast<double>(g[j]);
      m[j] = static_cast<T>(cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj);
      v[j] = static_cast<T>(cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj);
      const double mhat = static_cast<double>(m[j]) / bc1;
      const double vhat = static_cast<double>(v[j]) / bc2;
      const double update = mhat / (std::sqrt(vhat) + cfg_.eps) +
                            cfg_.weight_decay * static_cast<double>(vals[j]);
      vals[j] = static_cast<T>(static_cast<double>(vals[j]) -
                               cfg_.learning_rate * update);
    }
  }
}

template <typename T>
void AdamW<T>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace ssdm
