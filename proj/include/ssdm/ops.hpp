#pragma once

#include "ssdm/labelmap.hpp"
#include "ssdm/rng.hpp"
#include "ssdm/tensor.hpp"

namespace ssdm {

// Elementwise. Shapes must agree exactly; there is no broadcasting.
template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor);

// Sum of all elements, as a scalar tensor.
template <typename T>
Tensor<T> sum(const Tensor<T>& a);

template <typename T>
Tensor<T> gelu(const Tensor<T>& x);

// a[m,k] * b[k,n] -> [m,n]
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

// Softmax over the last axis, max-subtracted for stability.
template <typename T>
Tensor<T> softmax_lastdim(const Tensor<T>& x);

// Cross-correlation of x[C_in,H,W] with w[C_out,C_in,k,k] plus bias[C_out].
// k in {1,3}, stride in {1,2,4}; zero padding of (k-1)/2 keeps k=3 stride=1
// outputs the same size as the input.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                 int64_t stride = 1);

// Bilinear interpolation (align_corners=false) of x[C,H,W] to [C,out_h,out_w].
// Computed in lerp form so constant inputs are reproduced exactly.
template <typename T>
Tensor<T> resize_bilinear(const Tensor<T>& x, int64_t out_h, int64_t out_w);

// [C1,H,W] ++ [C2,H,W] -> [C1+C2,H,W], a first.
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);

// Normalizes each pixel's channel vector of x[C,H,W] to unit length; vectors
// with near-zero norm map to zero (and get zero gradient).
template <typename T>
Tensor<T> l2_normalize_channels(const Tensor<T>& x);

// Mean negative log-softmax of logits[K,H,W] over pixels whose label is not
// ignore_index. Labels must lie in [0,K) or equal ignore_index.
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, const LabelMap& labels,
                        int ignore_index = kIgnoreIndex);

// Fills from the rng: uniform on [lo,hi), or normal(mean, stddev).
template <typename T>
Tensor<T> uniform_tensor(Shape shape, Rng& rng, double lo, double hi,
                         bool requires_grad = false);
template <typename T>
Tensor<T> normal_tensor(Shape shape, Rng& rng, double mean, double stddev,
                        bool requires_grad = false);

}  // namespace ssdm
