#pragma once

#include <cstdint>

#include "ssdm/tensor.hpp"

namespace ssdm {

// Decomposed self-attention with an additive pre-softmax bias, one axis at a
// time. Q, K, V are [d, H, W] with d = heads * d_head; the bias is shared
// across heads.
//
// row_attention: for each head and pixel (i,j), attend over positions j' of
// row i with logits <Q(i,j), K(i,j')>/sqrt(d_head) + bias[i*W+j, j'].
// col_attention mirrors this along columns with bias[i*W+j, i'].
//
// `mac_counter`, when given, accumulates the multiply-add count of the
// attention core (logit dots, logit scaling, value aggregation).
template <typename T>
Tensor<T> row_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                        const Tensor<T>& bias, int64_t heads,
                        uint64_t* mac_counter = nullptr);

template <typename T>
Tensor<T> col_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                        const Tensor<T>& bias, int64_t heads,
                        uint64_t* mac_counter = nullptr);

// Closed form for the multiply-adds of the biased decomposed row+column core.
inline uint64_t decomposed_attention_mac_formula(int64_t heads, int64_t d_head,
                                                 int64_t h, int64_t w) {
  const uint64_t hw = static_cast<uint64_t>(h) * static_cast<uint64_t>(w);
  return static_cast<uint64_t>(heads) * hw * static_cast<uint64_t>(h + w) *
         static_cast<uint64_t>(2 * d_head + 1);
}

}  // namespace ssdm
