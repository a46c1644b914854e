#include "ssdm/semm.hpp"

#include <cmath>

#include "ssdm/ops.hpp"

namespace ssdm {

template <typename T>
SemmWeights<T> SemmWeights<T>::init(int64_t embed_channels, int64_t hidden,
                                    int64_t mask_channels, Rng rng) {
  SemmWeights<T> w;
  const double std1 = std::sqrt(2.0 / static_cast<double>(embed_channels * 9));
  const double std2 = std::sqrt(2.0 / static_cast<double>(hidden * 9));
  w.enc1_w = normal_tensor<T>({hidden, embed_channels, 3, 3}, rng.fork("enc1"), 0.0,
                              std1, true);
  w.enc1_b = Tensor<T>::zeros({hidden}, true);
  w.enc2_w = normal_tensor<T>({hidden, hidden, 3, 3}, rng.fork("enc2"), 0.0, std2, true);
  w.enc2_b = Tensor<T>::zeros({hidden}, true);
  w.proj_w = Tensor<T>::zeros({mask_channels, mask_channels + hidden, 1, 1}, true);
  w.proj_b = Tensor<T>::zeros({mask_channels}, true);
  return w;
}

template <typename T>
std::vector<Tensor<T>> SemmWeights<T>::parameters() const {
  return {enc1_w, enc1_b, enc2_w, enc2_b, proj_w, proj_b};
}

template <typename T>
std::vector<std::pair<std::string, Tensor<T>>> SemmWeights<T>::named_parameters(
    const std::string& prefix) const {
  return {{prefix + ".enc1.w", enc1_w}, {prefix + ".enc1.b", enc1_b},
          {prefix + ".enc2.w", enc2_w}, {prefix + ".enc2.b", enc2_b},
          {prefix + ".proj.w", proj_w}, {prefix + ".proj.b", proj_b}};
}

template <typename T>
Tensor<T> encode_semantic(const GeoEmbedding<T>& embedding, const SemmWeights<T>& w) {
  Tensor<T> hidden = gelu(conv2d(embedding.values, w.enc1_w, w.enc1_b, 1));
  return conv2d(hidden, w.enc2_w, w.enc2_b, 1);
}

template <typename T>
Tensor<T> inject_semantic(const Tensor<T>& mask_features, const Tensor<T>& semantic,
                          const SemmWeights<T>& w) {
  Tensor<T> aligned =
      resize_bilinear(semantic, mask_features.dim(1), mask_features.dim(2));
  Tensor<T> delta = conv2d(concat_channels(mask_features, aligned), w.proj_w,
                           w.proj_b, 1);
  return add(mask_features, delta);
}

#define SSDM_INSTANTIATE_SEMM(T)                                                  \
  template struct SemmWeights<T>;                                                 \
  template Tensor<T> encode_semantic(const GeoEmbedding<T>&, const SemmWeights<T>&); \
  template Tensor<T> inject_semantic(const Tensor<T>&, const Tensor<T>&,          \
                                     const SemmWeights<T>&);

SSDM_INSTANTIATE_SEMM(float)
SSDM_INSTANTIATE_SEMM(double)

#undef SSDM_INSTANTIATE_SEMM

}  // namespace ssdm
