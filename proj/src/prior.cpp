#include "ssdm/prior.hpp"

#include <cmath>

namespace ssdm {

template <typename T>
GeoAdapterWeights<T> GeoAdapterWeights<T>::init(int64_t embed_channels, int64_t geo_dim,
                                                int64_t num_stages, Rng rng) {
  GeoAdapterWeights<T> w;
  const double std = std::sqrt(2.0 / static_cast<double>(embed_channels));
  w.proj_w = normal_tensor<T>({geo_dim, embed_channels, 1, 1}, rng, 0.0, std, true);
  w.proj_b = Tensor<T>::zeros({geo_dim}, true);
  for (int64_t s = 0; s < num_stages; ++s) {
    w.tau.push_back(Tensor<T>::scalar(T(1), true));
  }
  return w;
}

template <typename T>
std::vector<Tensor<T>> GeoAdapterWeights<T>::parameters() const {
  std::vector<Tensor<T>> out{proj_w, proj_b};
  out.insert(out.end(), tau.begin(), tau.end());
  return out;
}

template <typename T>
Tensor<T> project_embedding(const GeoEmbedding<T>& embedding,
                            const GeoAdapterWeights<T>& weights) {
  return l2_normalize_channels(conv2d(embedding.values, weights.proj_w,
                                      weights.proj_b, 1));
}

template <typename T>
Tensor<T> resize_geometry_map(const Tensor<T>& projected, int64_t out_h,
                              int64_t out_w) {
  return l2_normalize_channels(resize_bilinear(projected, out_h, out_w));
}

namespace {

// Shared inner product so the directional slices and the materialized matrix
// follow the identical floating-point path.
template <typename T>
inline T pair_affinity(const T* g, int64_t channels, int64_t hw, int64_t p, int64_t q,
                       T tau) {
  T dot(0);
  for (int64_t c = 0; c < channels; ++c) dot += g[c * hw + p] * g[c * hw + q];
  return tau * dot;
}

template <typename T>
void check_geometry(const Tensor<T>& geometry, const Tensor<T>& tau) {
  if (geometry.ndim() != 3) {
    throw DimensionError("directional_affinities: expected geometry [d,H,W], got " +
                         format_shape(geometry.shape()));
  }
  if (tau.numel() != 1) {
    throw DimensionError("directional_affinities: tau must be a scalar tensor");
  }
}

// axis=0: same-row pairs, output [HW, W]; axis=1: same-column pairs, [HW, H].
template <typename T>
Tensor<T> directional_affinity(const Tensor<T>& geometry, const Tensor<T>& tau,
                               bool row_axis) {
  const int64_t c = geometry.dim(0), h = geometry.dim(1), w = geometry.dim(2);
  const int64_t hw = h * w;
  const int64_t len = row_axis ? w : h;
  const T tau_v = tau.item();
  const auto gv = geometry.values();

  std::vector<T> out(static_cast<size_t>(hw * len));
  for (int64_t i = 0; i < h; ++i) {
    for (int64_t j = 0; j < w; ++j) {
      const int64_t p = i * w + j;
      T* row = out.data() + p * len;
      for (int64_t t = 0; t < len; ++t) {
        const int64_t q = row_axis ? i * w + t : t * w + j;
        row[t] = pair_affinity(gv.data(), c, hw, p, q, tau_v);
      }
    }
  }

  auto node = std::make_shared<detail::Node<T>>();
  node->shape = {hw, len};
  node->value = std::move(out);
  if (detail::grad_enabled() && (geometry.requires_grad() || tau.requires_grad())) {
    node->requires_grad = true;
    node->parents = {geometry.node(), tau.node()};
    node->backward_fn = [c, h, w, len, row_axis, tau_v](detail::Node<T>& self) {
      auto& pg = *self.parents[0];
      auto& pt = *self.parents[1];
      const int64_t hw = h * w;
      const T* g = pg.value.data();
      for (int64_t i = 0; i < h; ++i) {
        for (int64_t j = 0; j < w; ++j) {
          const int64_t p = i * w + j;
          const T* grow = self.grad.data() + p * len;
          for (int64_t t = 0; t < len; ++t) {
            const int64_t q = row_axis ? i * w + t : t * w + j;
            const T go = grow[t];
            if (go == T(0)) continue;
            if (pt.requires_grad) {
              T dot(0);
              for (int64_t ch = 0; ch < c; ++ch) dot += g[ch * hw + p] * g[ch * hw + q];
              pt.grad[0] += go * dot;
            }
            if (pg.requires_grad) {
              // value appears once as query row p and once as key at q
              for (int64_t ch = 0; ch < c; ++ch) {
                pg.grad[ch * hw + p] += go * tau_v * g[ch * hw + q];
                pg.grad[ch * hw + q] += go * tau_v * g[ch * hw + p];
              }
            }
          }
        }
      }
    };
  }
  return Tensor<T>(std::move(node));
}

}  // namespace

template <typename T>
std::pair<Tensor<T>, Tensor<T>> directional_affinities(const Tensor<T>& geometry,
                                                       const Tensor<T>& tau) {
  check_geometry(geometry, tau);
  return {directional_affinity(geometry, tau, true),
          directional_affinity(geometry, tau, false)};
}

template <typename T>
Tensor<T> materialize_full_affinity(const Tensor<T>& geometry, const Tensor<T>& tau) {
  check_geometry(geometry, tau);
  const int64_t c = geometry.dim(0);
  const int64_t hw = geometry.dim(1) * geometry.dim(2);
  if (hw > 4096) {
    throw ValidationError("materialize_full_affinity: grid of " + std::to_string(hw) +
                          " pixels exceeds the 4096-pixel guard");
  }
  const T tau_v = tau.item();
  const auto gv = geometry.values();
  std::vector<T> out(static_cast<size_t>(hw * hw));
  for (int64_t p = 0; p < hw; ++p) {
    for (int64_t q = 0; q < hw; ++q) {
      out[p * hw + q] = pair_affinity(gv.data(), c, hw, p, q, tau_v);
    }
  }
  return Tensor<T>::from_data({hw, hw}, std::move(out));
}

template <typename T>
StructuralPrior<T> build_structural_prior(const Tensor<T>& projected, int stage,
                                          int64_t out_h, int64_t out_w,
                                          const Tensor<T>& tau) {
  StructuralPrior<T> prior;
  prior.stage = stage;
  prior.geometry = resize_geometry_map(projected, out_h, out_w);
  auto [gx, gy] = directional_affinities(prior.geometry, tau);
  prior.gx = std::move(gx);
  prior.gy = std::move(gy);
  return prior;
}

#define SSDM_INSTANTIATE_PRIOR(T)                                                   \
  template struct GeoAdapterWeights<T>;                                             \
  template Tensor<T> project_embedding(const GeoEmbedding<T>&,                      \
                                       const GeoAdapterWeights<T>&);                \
  template Tensor<T> resize_geometry_map(const Tensor<T>&, int64_t, int64_t);       \
  template std::pair<Tensor<T>, Tensor<T>> directional_affinities(const Tensor<T>&, \
                                                                  const Tensor<T>&); \
  template Tensor<T> materialize_full_affinity(const Tensor<T>&, const Tensor<T>&); \
  template StructuralPrior<T> build_structural_prior(const Tensor<T>&, int,         \
                                                     int64_t, int64_t,              \
                                                     const Tensor<T>&);

SSDM_INSTANTIATE_PRIOR(float)
SSDM_INSTANTIATE_PRIOR(double)

#undef SSDM_INSTANTIATE_PRIOR

}  // namespace ssdm
