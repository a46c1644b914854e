#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>

#include "ssdm/config.hpp"
#include "ssdm/metrics.hpp"
#include "ssdm/segnet.hpp"

namespace ssdm {

// Evaluates a trained model over the dataset's test split in sorted-id order.
// `drift_override`, when set, regenerates each tile's embedding with that
// drift probability (same streams, so only swapped cells differ).
SegReport evaluate_model(const SegNetWeights<float>& weights,
                         const DatasetIndex& index,
                         std::optional<double> drift_override,
                         const std::string& config_hash);

struct TrainOutput {
  SegNetWeights<float> weights;
  TrainStats stats;
};

// Trains one variant on the dataset's train split; model/train settings from
// the run config, variant overriding the config's.
TrainOutput train_variant(const DatasetIndex& index, const RunConfig& config,
                          Variant variant, std::ostream* log = nullptr);

void write_loss_csv(const std::filesystem::path& path, const TrainStats& stats);

// The reference desk-scale experiment shared by the acceptance suite and the
// default CLI config: dataset parameters pinned, model sized for a single
// CPU core.
RunConfig reference_run_config(uint64_t seed);

// Seeds committed for the ablation study; the first is the reference seed.
std::vector<uint64_t> ablation_seeds();

struct AblationVariantResult {
  Variant variant;
  SegReport report;
  double train_final_loss = 0.0;
};

struct AblationResult {
  uint64_t reference_seed = 0;
  std::map<Variant, AblationVariantResult> reference;  // all four variants
  double full_drift_miou = 0.0;  // Full re-evaluated at drift 0.1
  struct SeedPair {
    uint64_t seed;
    double baseline_miou;
    double full_miou;
  };
  std::vector<SeedPair> seed_pairs;  // includes the reference seed pair
};

// Trains the four variants on the reference seed plus Baseline/Full on the
// extra seeds. Datasets are generated under work_dir.
AblationResult run_ablation(const std::filesystem::path& work_dir,
                            std::ostream* log = nullptr);

}  // namespace ssdm
