#include "ssdm/segnet.hpp"

#include <cmath>

namespace ssdm {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kBaseline: return "baseline";
    case Variant::kSemOnly: return "sem";
    case Variant::kStructOnly: return "struct";
    case Variant::kFull: return "full";
  }
  throw ValidationError("unknown variant");
}

Variant variant_from_string(const std::string& name) {
  if (name == "baseline") return Variant::kBaseline;
  if (name == "sem") return Variant::kSemOnly;
  if (name == "struct") return Variant::kStructOnly;
  if (name == "full") return Variant::kFull;
  throw ConfigError("unknown variant '" + name +
                    "' (expected baseline, sem, struct or full)");
}

void ModelConfig::validate() const {
  if (height % 32 != 0 || width % 32 != 0) {
    throw ConfigError("model: input size must be a multiple of 32, got " +
                      std::to_string(height) + "x" + std::to_string(width));
  }
  if (num_classes < 2) throw ConfigError("model: need at least 2 classes");
  for (int stage = 0; stage < 4; ++stage) {
    if (smm_latent(stage) % smm_heads != 0) {
      throw ConfigError("model: stage " + std::to_string(stage) + " latent dim " +
                        std::to_string(smm_latent(stage)) + " not divisible by " +
                        std::to_string(smm_heads) + " heads");
    }
  }
}

namespace {

template <typename T>
Tensor<T> conv_init(Shape shape, Rng rng) {
  const int64_t fan_in = shape[1] * shape[2] * shape[3];
  const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
  return normal_tensor<T>(std::move(shape), rng, 0.0, std, true);
}

}  // namespace

template <typename T>
SegNetWeights<T> SegNetWeights<T>::init(const ModelConfig& config) {
  config.validate();
  SegNetWeights<T> w;
  w.config = config;
  // Every tensor draws from its own named stream, so the shared trunk is
  // identical across variants with the same seed.
  Rng root(config.seed, "segnet");

  w.stem1_w = conv_init<T>({config.stem_channels, 3, 3, 3}, root.fork("stem1"));
  w.stem1_b = Tensor<T>::zeros({config.stem_channels}, true);
  w.stem2_w = conv_init<T>({config.stage_widths[0], config.stem_channels, 3, 3},
                           root.fork("stem2"));
  w.stem2_b = Tensor<T>::zeros({config.stage_widths[0]}, true);

  for (int stage = 0; stage < 4; ++stage) {
    const int64_t in_c = stage == 0 ? config.stage_widths[0]
                                    : config.stage_widths[static_cast<size_t>(stage - 1)];
    const int64_t out_c = config.stage_widths[static_cast<size_t>(stage)];
    auto& s = w.stages[static_cast<size_t>(stage)];
    const std::string tag = "stage" + std::to_string(stage);
    s.c1_w = conv_init<T>({out_c, in_c, 3, 3}, root.fork(tag + ".c1"));
    s.c1_b = Tensor<T>::zeros({out_c}, true);
    s.c2_w = conv_init<T>({out_c, out_c, 3, 3}, root.fork(tag + ".c2"));
    s.c2_b = Tensor<T>::zeros({out_c}, true);
  }

  if (config.uses_smm()) {
    w.adapter = GeoAdapterWeights<T>::init(config.embed_channels, config.geo_dim, 4,
                                           root.fork("adapter"));
    for (int stage = 0; stage < 4; ++stage) {
      w.smm.push_back(SmmWeights<T>::init(config.stage_widths[static_cast<size_t>(stage)],
                                          config.smm_latent(stage), config.smm_heads,
                                          root.fork("smm" + std::to_string(stage))));
    }
  }
  if (config.uses_semm()) {
    w.semm = SemmWeights<T>::init(config.embed_channels, config.semm_hidden,
                                  config.mask_channels, root.fork("semm"));
  }

  for (int stage = 0; stage < 4; ++stage) {
    w.lateral_w[static_cast<size_t>(stage)] =
        conv_init<T>({config.mask_channels,
                      config.stage_widths[static_cast<size_t>(stage)], 1, 1},
                     root.fork("lateral" + std::to_string(stage)));
    w.lateral_b[static_cast<size_t>(stage)] =
        Tensor<T>::zeros({config.mask_channels}, true);
  }
  w.smooth_w = conv_init<T>({config.mask_channels, config.mask_channels, 3, 3},
                            root.fork("smooth"));
  w.smooth_b = Tensor<T>::zeros({config.mask_channels}, true);
  w.cls_w = conv_init<T>({config.num_classes, config.mask_channels, 1, 1},
                         root.fork("classifier"));
  w.cls_b = Tensor<T>::zeros({config.num_classes}, true);
  return w;
}

template <typename T>
std::vector<std::pair<std::string, Tensor<T>>> SegNetWeights<T>::named_parameters()
    const {
  std::vector<std::pair<std::string, Tensor<T>>> out{
      {"stem1.w", stem1_w}, {"stem1.b", stem1_b},
      {"stem2.w", stem2_w}, {"stem2.b", stem2_b}};
  for (int stage = 0; stage < 4; ++stage) {
    const auto& s = stages[static_cast<size_t>(stage)];
    const std::string tag = "stage" + std::to_string(stage);
    out.emplace_back(tag + ".c1.w", s.c1_w);
    out.emplace_back(tag + ".c1.b", s.c1_b);
    out.emplace_back(tag + ".c2.w", s.c2_w);
    out.emplace_back(tag + ".c2.b", s.c2_b);
  }
  if (config.uses_smm()) {
    out.emplace_back("adapter.proj.w", adapter.proj_w);
    out.emplace_back("adapter.proj.b", adapter.proj_b);
    for (size_t stage = 0; stage < adapter.tau.size(); ++stage) {
      out.emplace_back("adapter.tau" + std::to_string(stage), adapter.tau[stage]);
    }
    for (size_t stage = 0; stage < smm.size(); ++stage) {
      auto named = smm[stage].named_parameters("smm" + std::to_string(stage));
      out.insert(out.end(), named.begin(), named.end());
    }
  }
  if (config.uses_semm()) {
    auto named = semm.named_parameters("semm");
    out.insert(out.end(), named.begin(), named.end());
  }
  for (int stage = 0; stage < 4; ++stage) {
    const std::string tag = "lateral" + std::to_string(stage);
    out.emplace_back(tag + ".w", lateral_w[static_cast<size_t>(stage)]);
    out.emplace_back(tag + ".b", lateral_b[static_cast<size_t>(stage)]);
  }
  out.emplace_back("smooth.w", smooth_w);
  out.emplace_back("smooth.b", smooth_b);
  out.emplace_back("classifier.w", cls_w);
  out.emplace_back("classifier.b", cls_b);
  return out;
}

template <typename T>
std::vector<Tensor<T>> SegNetWeights<T>::parameters() const {
  std::vector<Tensor<T>> out;
  for (auto& [name, tensor] : named_parameters()) out.push_back(tensor);
  return out;
}

template <typename T>
int64_t SegNetWeights<T>::parameter_count() const {
  int64_t count = 0;
  for (const auto& p : parameters()) count += p.numel();
  return count;
}

template <typename T>
Tensor<T> pixel_decode(const FeaturePyramid<T>& pyramid,
                       const SegNetWeights<T>& weights) {
  Tensor<T> top;
  for (int stage = 3; stage >= 0; --stage) {
    Tensor<T> lateral = conv2d(pyramid.levels[static_cast<size_t>(stage)],
                               weights.lateral_w[static_cast<size_t>(stage)],
                               weights.lateral_b[static_cast<size_t>(stage)], 1);
    if (stage == 3) {
      top = lateral;
    } else {
      top = add(lateral, resize_bilinear(top, lateral.dim(1), lateral.dim(2)));
    }
  }
  return conv2d(top, weights.smooth_w, weights.smooth_b, 1);
}

template <typename T>
ForwardTrace<T> forward_trace(const Tensor<T>& image,
                              const std::optional<GeoEmbedding<T>>& embedding,
                              const SegNetWeights<T>& weights) {
  const ModelConfig& cfg = weights.config;
  if (image.ndim() != 3 || image.dim(0) != 3) {
    throw DimensionError("forward: expected image [3,H,W], got " +
                         format_shape(image.shape()));
  }
  if (image.dim(1) % 32 != 0 || image.dim(2) % 32 != 0) {
    throw DimensionError("forward: input size must be a multiple of 32, got " +
                         format_shape(image.shape()));
  }
  if (cfg.needs_embedding() && !embedding.has_value()) {
    throw ConfigError("variant '" + variant_name(cfg.variant) +
                      "' requires a global embedding input");
  }

  ForwardTrace<T> trace;
  Tensor<T> x = gelu(conv2d(image, weights.stem1_w, weights.stem1_b, 2));
  x = gelu(conv2d(x, weights.stem2_w, weights.stem2_b, 2));

  // One shared projection of the embedding feeds every stage's prior.
  Tensor<T> projected;
  if (cfg.uses_smm()) {
    projected = project_embedding(*embedding, weights.adapter);
  }

  for (int stage = 0; stage < 4; ++stage) {
    const auto& s = weights.stages[static_cast<size_t>(stage)];
    x = gelu(conv2d(x, s.c1_w, s.c1_b, stage == 0 ? 1 : 2));
    x = gelu(conv2d(x, s.c2_w, s.c2_b, 1));
    if (cfg.uses_smm()) {
      const StructuralPrior<T> prior = build_structural_prior(
          projected, stage, x.dim(1), x.dim(2),
          weights.adapter.tau[static_cast<size_t>(stage)]);
      x = smm_forward(x, prior, weights.smm[static_cast<size_t>(stage)]);
    }
    trace.pyramid.levels[static_cast<size_t>(stage)] = x;
  }

  trace.mask_features_pre = pixel_decode(trace.pyramid, weights);
  if (cfg.uses_semm()) {
    Tensor<T> semantic = encode_semantic(*embedding, weights.semm);
    trace.mask_features = inject_semantic(trace.mask_features_pre, semantic, weights.semm);
  } else {
    trace.mask_features = trace.mask_features_pre;
  }

  Tensor<T> logits_s4 = conv2d(trace.mask_features, weights.cls_w, weights.cls_b, 1);
  trace.logits = resize_bilinear(logits_s4, image.dim(1), image.dim(2));
  return trace;
}

template <typename T>
Tensor<T> forward(const Tensor<T>& image,
                  const std::optional<GeoEmbedding<T>>& embedding,
                  const SegNetWeights<T>& weights) {
  return forward_trace(image, embedding, weights).logits;
}

LabelMap predict_labels(const Tensor<float>& logits) {
  const int64_t k = logits.dim(0), h = logits.dim(1), w = logits.dim(2);
  const int64_t hw = h * w;
  const auto lv = logits.values();
  LabelMap out = LabelMap::zeros(h, w);
  for (int64_t p = 0; p < hw; ++p) {
    int64_t best = 0;
    float best_v = lv[p];
    for (int64_t c = 1; c < k; ++c) {
      const float v = lv[c * hw + p];
      if (v > best_v) {  // strict: ties stay at the lower class index
        best_v = v;
        best = c;
      }
    }
    out.values[static_cast<size_t>(p)] = static_cast<uint8_t>(best);
  }
  return out;
}

LabelMap predict_sample(const SegNetWeights<float>& weights, const Sample& sample) {
  NoGradGuard no_grad;
  std::optional<GeoEmbedding<float>> embedding;
  if (weights.config.needs_embedding()) embedding = sample.embedding;
  return predict_labels(forward(sample.image, embedding, weights));
}

namespace {

double global_grad_norm(const std::vector<Tensor<float>>& params) {
  double sq = 0.0;
  for (const auto& p : params) {
    if (!p.has_grad()) continue;
    for (float g : p.grad()) sq += static_cast<double>(g) * g;
  }
  return std::sqrt(sq);
}

}  // namespace

TrainStats train(SegNetWeights<float>& weights, const std::vector<Sample>& samples,
                 const TrainConfig& config) {
  if (samples.empty()) throw ValidationError("train: empty dataset");
  auto params = weights.parameters();
  AdamW<float> optimizer(params, config.optim);
  Rng shuffle_root(weights.config.seed, "shuffle");

  TrainStats stats;
  double last_grad_norm = 0.0;
  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int64_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle = shuffle_root.fork(static_cast<uint64_t>(epoch));
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle.uniform_int(i)]);
    }
    for (size_t begin = 0; begin < order.size();
         begin += static_cast<size_t>(config.batch_size)) {
      const size_t end =
          std::min(order.size(), begin + static_cast<size_t>(config.batch_size));
      optimizer.zero_grad();
      Tensor<float> loss;
      const float inv = 1.0f / static_cast<float>(end - begin);
      for (size_t i = begin; i < end; ++i) {
        const Sample& sample = samples[order[i]];
        std::optional<GeoEmbedding<float>> embedding;
        if (weights.config.needs_embedding()) embedding = sample.embedding;
        Tensor<float> logits = forward(sample.image, embedding, weights);
        Tensor<float> sample_loss =
            scale(cross_entropy(logits, sample.labels, config.ignore_index), inv);
        loss = loss.defined() ? add(loss, sample_loss) : sample_loss;
      }
      const double loss_v = static_cast<double>(loss.item());
      if (!std::isfinite(loss_v)) {
        throw ValidationError(
            "train: non-finite loss at step " + std::to_string(stats.steps) +
            " (lr " + std::to_string(config.optim.learning_rate) + ", last grad norm " +
            std::to_string(last_grad_norm) + ")");
      }
      loss.backward();
      last_grad_norm = global_grad_norm(params);
      optimizer.step();
      if (stats.steps == 0) stats.first_loss = loss_v;
      stats.final_loss = loss_v;
      stats.loss_curve.emplace_back(stats.steps, loss_v);
      ++stats.steps;
    }
  }
  return stats;
}

#define SSDM_INSTANTIATE_SEGNET(T)                                              \
  template struct SegNetWeights<T>;                                             \
  template Tensor<T> pixel_decode(const FeaturePyramid<T>&,                     \
                                  const SegNetWeights<T>&);                     \
  template ForwardTrace<T> forward_trace(const Tensor<T>&,                      \
                                         const std::optional<GeoEmbedding<T>>&, \
                                         const SegNetWeights<T>&);              \
  template Tensor<T> forward(const Tensor<T>&,                                  \
                             const std::optional<GeoEmbedding<T>>&,             \
                             const SegNetWeights<T>&);

SSDM_INSTANTIATE_SEGNET(float)
SSDM_INSTANTIATE_SEGNET(double)

#undef SSDM_INSTANTIATE_SEGNET

}  // namespace ssdm
