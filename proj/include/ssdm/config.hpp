#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ssdm/segnet.hpp"
#include "ssdm/synthgeo.hpp"

namespace ssdm {

// One JSON document drives every command. Unknown keys are rejected; the
// stable 64-bit hash of the parsed document is embedded in all outputs, and
// SSDM_SEED in the environment overrides the seed.
struct RunConfig {
  uint64_t seed = 7;
  SceneSpec scene;
  struct DatasetBlock {
    std::string path = "data/synth";
    int64_t count = 250;
    double train_ratio = 0.8;
  } dataset;
  ModelConfig model;
  struct TrainBlock {
    int64_t epochs = 12;
    int64_t batch_size = 2;
    double learning_rate = 1e-3;
    double weight_decay = 0.05;
  } train;
  struct EvalBlock {
    std::optional<double> drift;  // regenerate embeddings with this drift
    bool export_masks = false;
  } eval;
  struct BenchBlock {
    std::vector<std::pair<int64_t, int64_t>> grids{{32, 32}, {64, 64}};
    int64_t latent = 32;
    int64_t heads = 2;
  } bench;
  struct PathsBlock {
    std::string checkpoint = "runs/checkpoint";
    std::string report = "runs/report.json";
    std::string loss_csv = "runs/loss.csv";
    std::string masks_dir = "runs/masks";
  } paths;

  std::string config_hash;  // hex of the canonical document hash

  TrainConfig train_config() const;
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text);

// Canonical serialization (sorted keys, no whitespace) hashed with FNV-1a.
uint64_t config_hash64(const std::string& json_text);

}  // namespace ssdm
