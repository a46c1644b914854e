#include "ssdm/checkpoint.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "ssdm/sst1.hpp"

namespace ssdm {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json model_config_to_json(const ModelConfig& c) {
  return json{{"variant", variant_name(c.variant)},
              {"classes", c.num_classes},
              {"height", c.height},
              {"width", c.width},
              {"stage_widths", c.stage_widths},
              {"stem_channels", c.stem_channels},
              {"mask_channels", c.mask_channels},
              {"embed_channels", c.embed_channels},
              {"geo_dim", c.geo_dim},
              {"smm_heads", c.smm_heads},
              {"smm_latent_cap", c.smm_latent_cap},
              {"semm_hidden", c.semm_hidden},
              {"seed", c.seed}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  c.variant = variant_from_string(j.at("variant").get<std::string>());
  c.num_classes = j.at("classes").get<int64_t>();
  c.height = j.at("height").get<int64_t>();
  c.width = j.at("width").get<int64_t>();
  const auto widths = j.at("stage_widths").get<std::vector<int64_t>>();
  if (widths.size() != 4) throw ConfigError("model: stage_widths needs 4 entries");
  std::copy(widths.begin(), widths.end(), c.stage_widths.begin());
  c.stem_channels = j.at("stem_channels").get<int64_t>();
  c.mask_channels = j.at("mask_channels").get<int64_t>();
  c.embed_channels = j.at("embed_channels").get<int64_t>();
  c.geo_dim = j.at("geo_dim").get<int64_t>();
  c.smm_heads = j.at("smm_heads").get<int64_t>();
  c.smm_latent_cap = j.at("smm_latent_cap").get<int64_t>();
  c.semm_hidden = j.at("semm_hidden").get<int64_t>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

std::string tensor_file_name(const std::string& param_name) {
  std::string file = param_name;
  for (char& ch : file) {
    if (ch == '.') ch = '_';
  }
  return file + ".sst";
}

// Stage index encoded in the parameter name, or -1 for shared weights.
int param_stage(const std::string& name) {
  for (const char* prefix : {"smm", "stage", "lateral", "adapter.tau"}) {
    const size_t len = std::string(prefix).size();
    if (name.rfind(prefix, 0) == 0 && name.size() > len &&
        name[len] >= '0' && name[len] <= '9') {
      return name[len] - '0';
    }
  }
  return -1;
}

}  // namespace

std::string model_config_to_json_text(const ModelConfig& config) {
  return model_config_to_json(config).dump();
}

ModelConfig model_config_from_json_text(const std::string& text) {
  return model_config_from_json(json::parse(text));
}

void save_checkpoint(const std::filesystem::path& dir,
                     const SegNetWeights<float>& weights,
                     const std::string& config_hash) {
  std::filesystem::create_directories(dir);
  ordered_json tensors;
  for (const auto& [name, tensor] : weights.named_parameters()) {
    const std::string file = tensor_file_name(name);
    save_tensor(dir / file, tensor);
    ordered_json entry;
    entry["file"] = file;
    entry["shape"] = tensor.shape();
    const int stage = param_stage(name);
    if (stage >= 0) entry["stage"] = stage; else entry["stage"] = nullptr;
    tensors[name] = std::move(entry);
  }
  ordered_json manifest;
  manifest["format"] = "ssdm-checkpoint-v1";
  manifest["config"] = model_config_to_json(weights.config);
  manifest["config_hash"] = config_hash;
  manifest["tensors"] = std::move(tensors);
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  out << manifest.dump(2) << "\n";
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
}

SegNetWeights<float> load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("no checkpoint manifest at " + dir.string());
  json manifest = json::parse(in);
  if (manifest.value("format", "") != "ssdm-checkpoint-v1") {
    throw IoError("unrecognized checkpoint format in " + dir.string());
  }
  const ModelConfig config = model_config_from_json(manifest.at("config"));
  SegNetWeights<float> weights = SegNetWeights<float>::init(config);
  for (auto& [name, tensor] : weights.named_parameters()) {
    if (!manifest.at("tensors").contains(name)) {
      throw ConfigError("checkpoint missing tensor '" + name + "'");
    }
    const auto& entry = manifest.at("tensors").at(name);
    Tensor<float> loaded = load_tensor_f32(dir / entry.at("file").get<std::string>());
    if (!same_shape(loaded.shape(), tensor.shape())) {
      throw ConfigError("checkpoint tensor '" + name + "' has shape " +
                        format_shape(loaded.shape()) + ", model expects " +
                        format_shape(tensor.shape()));
    }
    auto dst = tensor.mutable_values();
    const auto src = loaded.values();
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return weights;
}

std::string checkpoint_config_hash(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("no checkpoint manifest at " + dir.string());
  json manifest = json::parse(in);
  return manifest.value("config_hash", "");
}

}  // namespace ssdm
