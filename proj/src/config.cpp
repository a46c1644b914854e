#include "ssdm/config.hpp"

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ssdm/rng.hpp"

namespace ssdm {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& block, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, value] : block.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_if(const json& block, const char* key, T& out) {
  if (block.contains(key)) out = block.at(key).get<T>();
}

}  // namespace

TrainConfig RunConfig::train_config() const {
  TrainConfig cfg;
  cfg.epochs = train.epochs;
  cfg.batch_size = train.batch_size;
  cfg.optim.learning_rate = train.learning_rate;
  cfg.optim.weight_decay = train.weight_decay;
  return cfg;
}

uint64_t config_hash64(const std::string& json_text) {
  // json (std::map-backed) sorts keys, so the dump is canonical.
  const std::string canonical = json::parse(json_text).dump();
  return fnv1a64(canonical);
}

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown_keys(doc, {"version", "seed", "scene", "dataset", "model", "train",
                            "eval", "bench", "paths"},
                      "config root");
  if (doc.value("version", 1) != 1) {
    throw ConfigError("unsupported config version");
  }

  RunConfig cfg;
  read_if(doc, "seed", cfg.seed);

  if (doc.contains("scene")) {
    const json& s = doc.at("scene");
    reject_unknown_keys(s, {"height", "width", "classes", "cells", "texture",
                            "brightness", "embed_factor", "drift", "embed_channels"},
                        "scene");
    read_if(s, "height", cfg.scene.height);
    read_if(s, "width", cfg.scene.width);
    read_if(s, "classes", cfg.scene.num_classes);
    read_if(s, "cells", cfg.scene.num_cells);
    read_if(s, "texture", cfg.scene.texture_amplitude);
    read_if(s, "brightness", cfg.scene.brightness_jitter);
    read_if(s, "embed_factor", cfg.scene.embed_factor);
    read_if(s, "drift", cfg.scene.drift_prob);
    read_if(s, "embed_channels", cfg.scene.embed_channels);
  }

  if (doc.contains("dataset")) {
    const json& d = doc.at("dataset");
    reject_unknown_keys(d, {"path", "count", "train_ratio"}, "dataset");
    read_if(d, "path", cfg.dataset.path);
    read_if(d, "count", cfg.dataset.count);
    read_if(d, "train_ratio", cfg.dataset.train_ratio);
  }

  if (doc.contains("model")) {
    const json& m = doc.at("model");
    reject_unknown_keys(m, {"variant", "classes", "height", "width", "stage_widths",
                            "stem_channels", "mask_channels", "embed_channels",
                            "geo_dim", "smm_heads", "smm_latent_cap", "semm_hidden"},
                        "model");
    if (m.contains("variant")) {
      cfg.model.variant = variant_from_string(m.at("variant").get<std::string>());
    }
    read_if(m, "classes", cfg.model.num_classes);
    read_if(m, "height", cfg.model.height);
    read_if(m, "width", cfg.model.width);
    if (m.contains("stage_widths")) {
      const auto widths = m.at("stage_widths").get<std::vector<int64_t>>();
      if (widths.size() != 4) {
        throw ConfigError("model.stage_widths needs exactly 4 entries");
      }
      std::copy(widths.begin(), widths.end(), cfg.model.stage_widths.begin());
    }
    read_if(m, "stem_channels", cfg.model.stem_channels);
    read_if(m, "mask_channels", cfg.model.mask_channels);
    read_if(m, "embed_channels", cfg.model.embed_channels);
    read_if(m, "geo_dim", cfg.model.geo_dim);
    read_if(m, "smm_heads", cfg.model.smm_heads);
    read_if(m, "smm_latent_cap", cfg.model.smm_latent_cap);
    read_if(m, "semm_hidden", cfg.model.semm_hidden);
  }

  if (doc.contains("train")) {
    const json& t = doc.at("train");
    reject_unknown_keys(t, {"epochs", "batch_size", "learning_rate", "weight_decay"},
                        "train");
    read_if(t, "epochs", cfg.train.epochs);
    read_if(t, "batch_size", cfg.train.batch_size);
    read_if(t, "learning_rate", cfg.train.learning_rate);
    read_if(t, "weight_decay", cfg.train.weight_decay);
  }

  if (doc.contains("eval")) {
    const json& e = doc.at("eval");
    reject_unknown_keys(e, {"drift", "export_masks"}, "eval");
    if (e.contains("drift") && !e.at("drift").is_null()) {
      cfg.eval.drift = e.at("drift").get<double>();
    }
    read_if(e, "export_masks", cfg.eval.export_masks);
  }

  if (doc.contains("bench")) {
    const json& b = doc.at("bench");
    reject_unknown_keys(b, {"grids", "latent", "heads"}, "bench");
    if (b.contains("grids")) {
      cfg.bench.grids.clear();
      for (const auto& g : b.at("grids")) {
        if (!g.is_array() || g.size() != 2) {
          throw ConfigError("bench.grids entries must be [h, w] pairs");
        }
        cfg.bench.grids.emplace_back(g[0].get<int64_t>(), g[1].get<int64_t>());
      }
    }
    read_if(b, "latent", cfg.bench.latent);
    read_if(b, "heads", cfg.bench.heads);
  }

  if (doc.contains("paths")) {
    const json& p = doc.at("paths");
    reject_unknown_keys(p, {"checkpoint", "report", "loss_csv", "masks_dir"}, "paths");
    read_if(p, "checkpoint", cfg.paths.checkpoint);
    read_if(p, "report", cfg.paths.report);
    read_if(p, "loss_csv", cfg.paths.loss_csv);
    read_if(p, "masks_dir", cfg.paths.masks_dir);
  }

  if (const char* env_seed = std::getenv("SSDM_SEED")) {
    try {
      cfg.seed = std::stoull(env_seed);
    } catch (const std::exception&) {
      throw ConfigError("SSDM_SEED is not an unsigned integer");
    }
    doc["seed"] = cfg.seed;  // the hash reflects the effective seed
  }

  // One seed drives generation, initialization and shuffling.
  cfg.scene.seed = cfg.seed;
  cfg.model.seed = cfg.seed;

  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash64(doc.dump())));
  cfg.config_hash = buf;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_run_config(text);
}

}  // namespace ssdm
