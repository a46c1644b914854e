#include "ssdm/smm.hpp"

#include <cmath>

#include "ssdm/ops.hpp"

namespace ssdm {

namespace {

template <typename T>
Tensor<T> conv1x1_init(int64_t out_c, int64_t in_c, Rng rng) {
  const double std = std::sqrt(2.0 / static_cast<double>(in_c));
  return normal_tensor<T>({out_c, in_c, 1, 1}, rng, 0.0, std, true);
}

}  // namespace

template <typename T>
SmmWeights<T> SmmWeights<T>::init(int64_t feature_channels, int64_t latent_dim,
                                  int64_t heads, Rng rng) {
  if (latent_dim % heads != 0) {
    throw ValidationError("smm: latent dim " + std::to_string(latent_dim) +
                          " not divisible by " + std::to_string(heads) + " heads");
  }
  SmmWeights<T> w;
  w.heads = heads;
  w.p_w = conv1x1_init<T>(latent_dim, feature_channels, rng.fork("p"));
  w.p_b = Tensor<T>::zeros({latent_dim}, true);
  w.q_w = conv1x1_init<T>(latent_dim, latent_dim, rng.fork("q"));
  w.q_b = Tensor<T>::zeros({latent_dim}, true);
  w.k_w = conv1x1_init<T>(latent_dim, latent_dim, rng.fork("k"));
  w.k_b = Tensor<T>::zeros({latent_dim}, true);
  w.v_w = conv1x1_init<T>(latent_dim, latent_dim, rng.fork("v"));
  w.v_b = Tensor<T>::zeros({latent_dim}, true);
  w.o_w = conv1x1_init<T>(latent_dim, latent_dim, rng.fork("o"));
  w.o_b = Tensor<T>::zeros({latent_dim}, true);
  w.mlp1_w = conv1x1_init<T>(4 * latent_dim, latent_dim, rng.fork("mlp1"));
  w.mlp1_b = Tensor<T>::zeros({4 * latent_dim}, true);
  // Zero final layer: the residual branch contributes nothing at step 0.
  w.mlp2_w = Tensor<T>::zeros({feature_channels, 4 * latent_dim, 1, 1}, true);
  w.mlp2_b = Tensor<T>::zeros({feature_channels}, true);
  return w;
}

template <typename T>
std::vector<Tensor<T>> SmmWeights<T>::parameters() const {
  return {p_w, p_b, q_w, q_b, k_w, k_b, v_w, v_b, o_w, o_b,
          mlp1_w, mlp1_b, mlp2_w, mlp2_b};
}

template <typename T>
std::vector<std::pair<std::string, Tensor<T>>> SmmWeights<T>::named_parameters(
    const std::string& prefix) const {
  return {{prefix + ".p.w", p_w},       {prefix + ".p.b", p_b},
          {prefix + ".q.w", q_w},       {prefix + ".q.b", q_b},
          {prefix + ".k.w", k_w},       {prefix + ".k.b", k_b},
          {prefix + ".v.w", v_w},       {prefix + ".v.b", v_b},
          {prefix + ".o.w", o_w},       {prefix + ".o.b", o_b},
          {prefix + ".mlp1.w", mlp1_w}, {prefix + ".mlp1.b", mlp1_b},
          {prefix + ".mlp2.w", mlp2_w}, {prefix + ".mlp2.b", mlp2_b}};
}

template <typename T>
Tensor<T> smm_forward(const Tensor<T>& feature, const StructuralPrior<T>& prior,
                      const SmmWeights<T>& weights) {
  if (feature.ndim() != 3) {
    throw DimensionError("smm_forward: expected feature [C,H,W], got " +
                         format_shape(feature.shape()));
  }
  if (prior.geometry.dim(1) != feature.dim(1) ||
      prior.geometry.dim(2) != feature.dim(2)) {
    throw DimensionError("smm_forward: prior resolution " +
                         format_shape(prior.geometry.shape()) +
                         " does not match feature " + format_shape(feature.shape()));
  }
  Tensor<T> x = conv2d(feature, weights.p_w, weights.p_b, 1);
  Tensor<T> q = conv2d(x, weights.q_w, weights.q_b, 1);
  Tensor<T> k = conv2d(x, weights.k_w, weights.k_b, 1);
  Tensor<T> v = conv2d(x, weights.v_w, weights.v_b, 1);

  // Row pass feeds its value output into the column pass; Q and K are reused
  // along both axes.
  Tensor<T> v_row = row_attention(q, k, v, prior.gx, weights.heads);
  Tensor<T> fused = col_attention(q, k, v_row, prior.gy, weights.heads);

  Tensor<T> projected = conv2d(fused, weights.o_w, weights.o_b, 1);
  Tensor<T> hidden = gelu(conv2d(projected, weights.mlp1_w, weights.mlp1_b, 1));
  Tensor<T> delta = conv2d(hidden, weights.mlp2_w, weights.mlp2_b, 1);
  return add(feature, delta);
}

#define SSDM_INSTANTIATE_SMM(T) \
  template struct SmmWeights<T>; \
  template Tensor<T> smm_forward(const Tensor<T>&, const StructuralPrior<T>&, \
                                 const SmmWeights<T>&);

SSDM_INSTANTIATE_SMM(float)
SSDM_INSTANTIATE_SMM(double)

#undef SSDM_INSTANTIATE_SMM

}  // namespace ssdm
