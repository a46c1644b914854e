#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ssdm/optim.hpp"
#include "ssdm/semm.hpp"
#include "ssdm/smm.hpp"
#include "ssdm/synthgeo.hpp"

namespace ssdm {

enum class Variant { kBaseline, kSemOnly, kStructOnly, kFull };

std::string variant_name(Variant v);
Variant variant_from_string(const std::string& name);

struct ModelConfig {
  Variant variant = Variant::kBaseline;
  int64_t num_classes = 6;
  int64_t height = 64;
  int64_t width = 64;
  std::array<int64_t, 4> stage_widths{32, 64, 128, 256};
  int64_t stem_channels = 16;
  int64_t mask_channels = 64;   // C_M
  int64_t embed_channels = 64;  // C_e
  int64_t geo_dim = 16;         // adapter output channels
  int64_t smm_heads = 2;
  int64_t smm_latent_cap = 64;  // latent dim is min(C_l, cap)
  int64_t semm_hidden = 32;
  uint64_t seed = 0;

  bool uses_smm() const {
    return variant == Variant::kStructOnly || variant == Variant::kFull;
  }
  bool uses_semm() const {
    return variant == Variant::kSemOnly || variant == Variant::kFull;
  }
  bool needs_embedding() const { return variant != Variant::kBaseline; }
  int64_t smm_latent(int stage) const {
    return std::min(stage_widths[static_cast<size_t>(stage)], smm_latent_cap);
  }
  void validate() const;
};

// Multi-scale encoder features at strides 4, 8, 16, 32.
template <typename T>
struct FeaturePyramid {
  std::array<Tensor<T>, 4> levels;
};

template <typename T>
struct SegNetWeights {
  ModelConfig config;

  Tensor<T> stem1_w, stem1_b;  // 3 -> stem_channels, stride 2
  Tensor<T> stem2_w, stem2_b;  // stem_channels -> width[0], stride 2
  struct StageWeights {
    Tensor<T> c1_w, c1_b;  // stride 2 except stage 0
    Tensor<T> c2_w, c2_b;
  };
  std::array<StageWeights, 4> stages;

  std::vector<SmmWeights<T>> smm;   // one per stage when the variant uses SMM
  GeoAdapterWeights<T> adapter;     // shared projection + per-stage tau
  SemmWeights<T> semm;

  std::array<Tensor<T>, 4> lateral_w, lateral_b;  // widths[l] -> C_M
  Tensor<T> smooth_w, smooth_b;                   // 3x3, C_M -> C_M
  Tensor<T> cls_w, cls_b;                         // 1x1, C_M -> K

  static SegNetWeights init(const ModelConfig& config);
  std::vector<Tensor<T>> parameters() const;
  std::vector<std::pair<std::string, Tensor<T>>> named_parameters() const;
  int64_t parameter_count() const;
};

template <typename T>
struct ForwardTrace {
  FeaturePyramid<T> pyramid;   // post-modulation stage outputs
  Tensor<T> mask_features_pre; // pixel decoder output M
  Tensor<T> mask_features;     // M' after SeMM (== M when disabled)
  Tensor<T> logits;            // [K,H,W]
};

// Stem -> stages (SMM per stage when enabled) -> pixel decoder -> SeMM when
// enabled -> 1x1 classifier -> bilinear upsample to input resolution.
template <typename T>
ForwardTrace<T> forward_trace(const Tensor<T>& image,
                              const std::optional<GeoEmbedding<T>>& embedding,
                              const SegNetWeights<T>& weights);

template <typename T>
Tensor<T> forward(const Tensor<T>& image,
                  const std::optional<GeoEmbedding<T>>& embedding,
                  const SegNetWeights<T>& weights);

// Lateral 1x1 projections, top-down upsample-and-add, 3x3 smoothing.
template <typename T>
Tensor<T> pixel_decode(const FeaturePyramid<T>& pyramid, const SegNetWeights<T>& weights);

// Argmax over classes; exact ties resolve to the lower class index.
LabelMap predict_labels(const Tensor<float>& logits);

struct TrainConfig {
  int64_t epochs = 15;
  int64_t batch_size = 2;
  AdamWConfig optim{.learning_rate = 1e-3, .weight_decay = 0.05};
  int ignore_index = kIgnoreIndex;
};

struct TrainStats {
  std::vector<std::pair<int64_t, double>> loss_curve;  // (step, loss)
  double first_loss = 0.0;
  double final_loss = 0.0;
  int64_t steps = 0;
};

// AdamW over shuffled mini-batches; fully deterministic for a fixed seed.
// Aborts with step/lr/grad-norm diagnostics if the loss turns non-finite.
TrainStats train(SegNetWeights<float>& weights, const std::vector<Sample>& samples,
                 const TrainConfig& config);

LabelMap predict_sample(const SegNetWeights<float>& weights, const Sample& sample);

}  // namespace ssdm
