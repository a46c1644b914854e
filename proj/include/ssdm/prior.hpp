#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ssdm/ops.hpp"
#include "ssdm/tensor.hpp"

namespace ssdm {

// Coarse global embedding grid for one tile, [C_e, H_e, W_e].
template <typename T>
struct GeoEmbedding {
  Tensor<T> values;
  std::string tile_id;

  int64_t channels() const { return values.dim(0); }
};

// Shared 1x1 projection plus one learnable temperature per encoder stage.
template <typename T>
struct GeoAdapterWeights {
  Tensor<T> proj_w;  // [d_g, C_e, 1, 1]
  Tensor<T> proj_b;  // [d_g]
  std::vector<Tensor<T>> tau;  // one scalar per stage, initialized to 1

  static GeoAdapterWeights init(int64_t embed_channels, int64_t geo_dim,
                                int64_t num_stages, Rng rng);
  std::vector<Tensor<T>> parameters() const;
};

// Per-stage structural prior: the resized unit-norm geometry map and the
// directional slices of the pairwise affinity.
template <typename T>
struct StructuralPrior {
  int stage = 0;
  Tensor<T> geometry;  // [d_g, H_l, W_l]
  Tensor<T> gx;        // [H_l*W_l, W_l]
  Tensor<T> gy;        // [H_l*W_l, H_l]
};

// 1x1 projection of the embedding followed by per-pixel L2 normalization.
template <typename T>
Tensor<T> project_embedding(const GeoEmbedding<T>& embedding,
                            const GeoAdapterWeights<T>& weights);

// Bilinear resize to the stage resolution, then re-normalization of each
// pixel vector.
template <typename T>
Tensor<T> resize_geometry_map(const Tensor<T>& projected, int64_t out_h, int64_t out_w);

// Same-row / same-column slices of the full affinity, scaled by tau:
//   gx[(i,j), j'] = tau * <g(:,i,j), g(:,i,j')>
//   gy[(i,j), i'] = tau * <g(:,i,j), g(:,i',j)>
// The full HW x HW matrix is never formed. Differentiable in both arguments.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> directional_affinities(const Tensor<T>& geometry,
                                                       const Tensor<T>& tau);

// Test oracle: the dense pairwise affinity, sharing the inner-product code
// path with directional_affinities so slices agree bitwise. Forward only.
// Guarded to HW <= 4096.
template <typename T>
Tensor<T> materialize_full_affinity(const Tensor<T>& geometry, const Tensor<T>& tau);

template <typename T>
StructuralPrior<T> build_structural_prior(const Tensor<T>& projected, int stage,
                                          int64_t out_h, int64_t out_w,
                                          const Tensor<T>& tau);

}  // namespace ssdm
