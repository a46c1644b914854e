#include "ssdm/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>

namespace ssdm {

SegReport evaluate_model(const SegNetWeights<float>& weights,
                         const DatasetIndex& index,
                         std::optional<double> drift_override,
                         const std::string& config_hash) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> ids = index.test_ids;
  std::sort(ids.begin(), ids.end());

  const int64_t k = weights.config.num_classes;
  ConfusionMatrix cm(k);
  int64_t gt_components = 0, pred_components = 0;
  for (const auto& id : ids) {
    Sample sample = load_sample(index, id);
    if (drift_override.has_value()) {
      sample.embedding =
          regen_embedding(index.spec, sample.labels, std::stoll(id), *drift_override);
    }
    const LabelMap pred = predict_sample(weights, sample);
    cm.merge(confusion(sample.labels, pred, k));
    for (int64_t c : count_components_by_class(sample.labels, k)) gt_components += c;
    for (int64_t c : count_components_by_class(pred, k)) pred_components += c;
  }

  SegReport report;
  report.config_hash = config_hash;
  report.seed = weights.config.seed;
  report.variant = variant_name(weights.config.variant);
  report.num_classes = k;
  report.metrics = compute_metrics(cm);
  report.gt_components = gt_components;
  report.pred_components = pred_components;
  report.fragmentation =
      static_cast<double>(pred_components) / static_cast<double>(gt_components);
  report.pixels = cm.total();
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

TrainOutput train_variant(const DatasetIndex& index, const RunConfig& config,
                          Variant variant, std::ostream* log) {
  ModelConfig model = config.model;
  model.variant = variant;
  model.num_classes = index.spec.num_classes;
  model.height = index.spec.height;
  model.width = index.spec.width;
  model.embed_channels = index.spec.embed_channels;
  model.validate();

  TrainOutput out{SegNetWeights<float>::init(model), {}};
  const auto samples = load_samples(index, index.train_ids);
  const auto start = std::chrono::steady_clock::now();
  out.stats = train(out.weights, samples, config.train_config());
  if (log) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    *log << "trained " << variant_name(variant) << " seed " << model.seed << ": "
         << out.stats.steps << " steps, loss " << out.stats.first_loss << " -> "
         << out.stats.final_loss << " (" << secs << " s)\n";
  }
  return out;
}

void write_loss_csv(const std::filesystem::path& path, const TrainStats& stats) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "step,loss\n";
  for (const auto& [step, loss] : stats.loss_curve) {
    out << step << "," << loss << "\n";
  }
}

RunConfig reference_run_config(uint64_t seed) {
  RunConfig cfg = parse_run_config("{}");
  cfg.seed = seed;
  cfg.scene = SceneSpec{};  // 64x64, 6 classes, 12 cells, a=0.4, b=0.3, s=8, p=0
  cfg.scene.seed = seed;
  cfg.dataset.count = 250;
  cfg.dataset.train_ratio = 0.8;

  // Sized so twelve trainings fit a single CPU core.
  cfg.model = ModelConfig{};
  cfg.model.variant = Variant::kFull;
  cfg.model.num_classes = cfg.scene.num_classes;
  cfg.model.stage_widths = {16, 32, 48, 64};
  cfg.model.stem_channels = 8;
  cfg.model.mask_channels = 32;
  cfg.model.geo_dim = 8;
  cfg.model.smm_latent_cap = 32;
  cfg.model.semm_hidden = 32;
  cfg.model.seed = seed;

  cfg.train.epochs = 10;
  cfg.train.batch_size = 2;
  cfg.train.learning_rate = 2e-3;
  cfg.train.weight_decay = 0.02;
  return cfg;
}

std::vector<uint64_t> ablation_seeds() { return {7, 11, 23, 42, 101}; }

AblationResult run_ablation(const std::filesystem::path& work_dir, std::ostream* log) {
  const auto seeds = ablation_seeds();
  AblationResult result;
  result.reference_seed = seeds[0];

  for (size_t si = 0; si < seeds.size(); ++si) {
    const uint64_t seed = seeds[si];
    RunConfig cfg = reference_run_config(seed);
    const auto data_dir = work_dir / ("seed_" + std::to_string(seed));
    DatasetIndex index;
    if (std::filesystem::exists(data_dir / "meta.json")) {
      index = open_dataset(data_dir);
    } else {
      if (log) *log << "generating dataset seed " << seed << "\n";
      index = gen_dataset(cfg.scene, cfg.dataset.count, cfg.dataset.train_ratio,
                          data_dir);
    }

    const bool reference = si == 0;
    const std::vector<Variant> variants =
        reference ? std::vector<Variant>{Variant::kBaseline, Variant::kSemOnly,
                                         Variant::kStructOnly, Variant::kFull}
                  : std::vector<Variant>{Variant::kBaseline, Variant::kFull};

    double baseline_miou = 0.0, full_miou = 0.0;
    for (Variant variant : variants) {
      TrainOutput trained = train_variant(index, cfg, variant, log);
      SegReport report = evaluate_model(trained.weights, index, std::nullopt,
                                        cfg.config_hash);
      if (log) {
        *log << "  " << variant_name(variant) << ": mIoU " << report.metrics.miou
             << ", OA " << report.metrics.oa << ", frag " << report.fragmentation
             << "\n";
      }
      if (variant == Variant::kBaseline) baseline_miou = report.metrics.miou;
      if (variant == Variant::kFull) full_miou = report.metrics.miou;
      if (reference) {
        result.reference[variant] =
            AblationVariantResult{variant, report, trained.stats.final_loss};
        if (variant == Variant::kFull) {
          SegReport drift_report =
              evaluate_model(trained.weights, index, 0.1, cfg.config_hash);
          result.full_drift_miou = drift_report.metrics.miou;
          if (log) {
            *log << "  full @ drift 0.1: mIoU " << drift_report.metrics.miou << "\n";
          }
        }
      }
    }
    result.seed_pairs.push_back({seed, baseline_miou, full_miou});
  }
  return result;
}

}  // namespace ssdm
