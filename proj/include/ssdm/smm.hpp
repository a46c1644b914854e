#pragma once

#include <string>
#include <vector>

#include "ssdm/attention.hpp"
#include "ssdm/prior.hpp"

namespace ssdm {

// Structural Modulation Module for one encoder stage: 1x1 input projection,
// biased row then column attention, output projection, MLP, residual add.
// The MLP's final layer starts at exactly zero, so the block is an identity
// until training moves it.
template <typename T>
struct SmmWeights {
  Tensor<T> p_w, p_b;        // C_l -> d
  Tensor<T> q_w, q_b;        // d -> d
  Tensor<T> k_w, k_b;
  Tensor<T> v_w, v_b;
  Tensor<T> o_w, o_b;        // d -> d
  Tensor<T> mlp1_w, mlp1_b;  // d -> 4d
  Tensor<T> mlp2_w, mlp2_b;  // 4d -> C_l, zero at init
  int64_t heads = 2;

  static SmmWeights init(int64_t feature_channels, int64_t latent_dim, int64_t heads,
                         Rng rng);
  std::vector<Tensor<T>> parameters() const;
  std::vector<std::pair<std::string, Tensor<T>>> named_parameters(
      const std::string& prefix) const;
  int64_t latent_dim() const { return p_w.dim(0); }
};

template <typename T>
Tensor<T> smm_forward(const Tensor<T>& feature, const StructuralPrior<T>& prior,
                      const SmmWeights<T>& weights);

}  // namespace ssdm
