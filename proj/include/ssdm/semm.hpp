#pragma once

#include <string>
#include <vector>

#include "ssdm/prior.hpp"
#include "ssdm/tensor.hpp"

namespace ssdm {

// Semantic Modulation Module: encodes the raw embedding with two 3x3 convs
// (independent of the structural adapter) and residually injects it into the
// mask features through a zero-initialized 1x1 projection.
template <typename T>
struct SemmWeights {
  Tensor<T> enc1_w, enc1_b;  // C_e -> hidden, 3x3
  Tensor<T> enc2_w, enc2_b;  // hidden -> hidden, 3x3
  Tensor<T> proj_w, proj_b;  // (C_M + hidden) -> C_M, 1x1, zero at init

  static SemmWeights init(int64_t embed_channels, int64_t hidden,
                          int64_t mask_channels, Rng rng);
  std::vector<Tensor<T>> parameters() const;
  std::vector<std::pair<std::string, Tensor<T>>> named_parameters(
      const std::string& prefix) const;
  int64_t hidden_channels() const { return enc1_w.dim(0); }
};

template <typename T>
Tensor<T> encode_semantic(const GeoEmbedding<T>& embedding, const SemmWeights<T>& w);

template <typename T>
Tensor<T> inject_semantic(const Tensor<T>& mask_features, const Tensor<T>& semantic,
                          const SemmWeights<T>& w);

}  // namespace ssdm
