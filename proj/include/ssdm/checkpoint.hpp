#pragma once

#include <filesystem>

#include "ssdm/segnet.hpp"

namespace ssdm {

// Checkpoint directory: manifest.json mapping parameter name -> file, shape
// and stage, plus one SST1 tensor per parameter. The manifest also embeds the
// model config so a checkpoint is self-describing.
void save_checkpoint(const std::filesystem::path& dir,
                     const SegNetWeights<float>& weights,
                     const std::string& config_hash);

SegNetWeights<float> load_checkpoint(const std::filesystem::path& dir);

std::string checkpoint_config_hash(const std::filesystem::path& dir);

// Model config <-> JSON used by both checkpoints and run configs.
ModelConfig model_config_from_json_text(const std::string& text);
std::string model_config_to_json_text(const ModelConfig& config);

}  // namespace ssdm
