#include "ssdm/synthgeo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ssdm/metrics.hpp"
#include "ssdm/sst1.hpp"

namespace ssdm {

using nlohmann::json;
using nlohmann::ordered_json;

void SceneSpec::validate() const {
  if (height < 1 || width < 1) throw ValidationError("scene: empty tile");
  if (num_classes < 1 || num_classes > 254) {
    throw ValidationError("scene: class count must fit a u8 label map");
  }
  if (num_cells < num_classes) {
    throw ValidationError("scene: need at least one cell per class");
  }
  if (drift_prob < 0.0 || drift_prob > 1.0) {
    throw ValidationError("scene: drift probability outside [0,1]");
  }
  if (embed_factor < 1 || height % embed_factor != 0 || width % embed_factor != 0) {
    throw ValidationError("scene: embed factor must divide the tile size");
  }
  if (embed_channels < 1) throw ValidationError("scene: embedding needs channels");
}

LabelMap gen_labelmap(const SceneSpec& spec, Rng& rng) {
  spec.validate();
  const int64_t h = spec.height, w = spec.width, n = spec.num_cells;

  // Distinct sites guarantee every site owns at least its own pixel.
  std::vector<std::pair<int64_t, int64_t>> sites;
  sites.reserve(static_cast<size_t>(n));
  while (static_cast<int64_t>(sites.size()) < n) {
    const int64_t y = static_cast<int64_t>(rng.uniform_int(static_cast<uint64_t>(h)));
    const int64_t x = static_cast<int64_t>(rng.uniform_int(static_cast<uint64_t>(w)));
    if (std::find(sites.begin(), sites.end(), std::make_pair(y, x)) == sites.end()) {
      sites.emplace_back(y, x);
    }
  }

  // First K sites cover every class (shuffled), the rest draw uniformly.
  std::vector<uint8_t> site_class(static_cast<size_t>(n));
  for (int64_t i = 0; i < spec.num_classes; ++i) {
    site_class[static_cast<size_t>(i)] = static_cast<uint8_t>(i);
  }
  for (int64_t i = spec.num_classes - 1; i > 0; --i) {
    const auto j = rng.uniform_int(static_cast<uint64_t>(i + 1));
    std::swap(site_class[static_cast<size_t>(i)], site_class[j]);
  }
  for (int64_t i = spec.num_classes; i < n; ++i) {
    site_class[static_cast<size_t>(i)] =
        static_cast<uint8_t>(rng.uniform_int(static_cast<uint64_t>(spec.num_classes)));
  }

  LabelMap labels = LabelMap::zeros(h, w);
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      int64_t best = 0;
      int64_t best_d = INT64_MAX;
      for (int64_t s = 0; s < n; ++s) {
        const int64_t dy = y - sites[static_cast<size_t>(s)].first;
        const int64_t dx = x - sites[static_cast<size_t>(s)].second;
        const int64_t d = dy * dy + dx * dx;
        if (d < best_d) {  // ties resolve to the lower site index
          best_d = d;
          best = s;
        }
      }
      labels.at(y, x) = site_class[static_cast<size_t>(best)];
    }
  }
  return labels;
}

Tensor<float> class_palette(const SceneSpec& spec) {
  Rng rng(spec.seed, "palette");
  const int64_t k = spec.num_classes;
  std::vector<float> colors(static_cast<size_t>(k * 3));
  // Rejection keeps classes distinguishable yet close enough that jitter and
  // texture create real confusion.
  constexpr double min_dist = 0.25;
  for (int64_t c = 0; c < k; ++c) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      double cand[3];
      for (double& v : cand) v = rng.uniform(0.15, 0.85);
      bool ok = true;
      for (int64_t o = 0; o < c && ok; ++o) {
        double d2 = 0.0;
        for (int ch = 0; ch < 3; ++ch) {
          const double diff = cand[ch] - colors[static_cast<size_t>(o * 3 + ch)];
          d2 += diff * diff;
        }
        ok = d2 >= min_dist * min_dist;
      }
      if (ok || attempt == 999) {
        for (int ch = 0; ch < 3; ++ch) {
          colors[static_cast<size_t>(c * 3 + ch)] = static_cast<float>(cand[ch]);
        }
        break;
      }
    }
  }
  return Tensor<float>::from_data({k, 3}, std::move(colors));
}

namespace {

// Connected regions of the label map act as the scene's "cells" (Voronoi
// cells merged within a class).
std::vector<int32_t> region_ids(const LabelMap& labels, int64_t num_classes,
                                int64_t* count_out) {
  const int64_t h = labels.height, w = labels.width;
  std::vector<int32_t> ids(static_cast<size_t>(h * w), -1);
  std::vector<int64_t> stack;
  int32_t next = 0;
  for (int64_t start = 0; start < h * w; ++start) {
    if (ids[static_cast<size_t>(start)] >= 0) continue;
    const uint8_t cls = labels.values[static_cast<size_t>(start)];
    if (cls >= num_classes) continue;
    stack.push_back(start);
    ids[static_cast<size_t>(start)] = next;
    while (!stack.empty()) {
      const int64_t p = stack.back();
      stack.pop_back();
      const int64_t y = p / w, x = p % w;
      const int64_t nb[4] = {p - w, p + w, p - 1, p + 1};
      const bool ok[4] = {y > 0, y + 1 < h, x > 0, x + 1 < w};
      for (int i = 0; i < 4; ++i) {
        if (ok[i] && ids[static_cast<size_t>(nb[i])] < 0 &&
            labels.values[static_cast<size_t>(nb[i])] == cls) {
          ids[static_cast<size_t>(nb[i])] = next;
          stack.push_back(nb[i]);
        }
      }
    }
    ++next;
  }
  if (count_out) *count_out = next;
  return ids;
}

}  // namespace

Tensor<float> render_image(const LabelMap& labels, const SceneSpec& spec, Rng& rng) {
  const int64_t h = labels.height, w = labels.width, hw = h * w;
  const Tensor<float> palette = class_palette(spec);
  const auto pal = palette.values();

  int64_t num_regions = 0;
  const std::vector<int32_t> regions = region_ids(labels, spec.num_classes, &num_regions);
  std::vector<float> region_offset(static_cast<size_t>(num_regions));
  for (auto& v : region_offset) {
    v = static_cast<float>(
        rng.uniform(-spec.brightness_jitter, spec.brightness_jitter));
  }

  // Smoothed noise: 3x3 box sum scaled by 1/3 keeps the white-noise variance,
  // so texture_amplitude stays the per-pixel scale after smoothing.
  std::vector<float> noise(static_cast<size_t>(3 * hw));
  {
    std::vector<float> white(static_cast<size_t>(3 * hw));
    for (auto& v : white) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    for (int64_t c = 0; c < 3; ++c) {
      const float* src = white.data() + c * hw;
      float* dst = noise.data() + c * hw;
      for (int64_t y = 0; y < h; ++y) {
        for (int64_t x = 0; x < w; ++x) {
          float acc = 0.0f;
          for (int64_t dy = -1; dy <= 1; ++dy) {
            for (int64_t dx = -1; dx <= 1; ++dx) {
              const int64_t yy = y + dy, xx = x + dx;
              if (yy >= 0 && yy < h && xx >= 0 && xx < w) acc += src[yy * w + xx];
            }
          }
          dst[y * w + x] = acc / 3.0f;
        }
      }
    }
  }

  std::vector<float> image(static_cast<size_t>(3 * hw));
  const float a = static_cast<float>(spec.texture_amplitude);
  for (int64_t p = 0; p < hw; ++p) {
    const uint8_t cls = labels.values[static_cast<size_t>(p)];
    const int32_t region = regions[static_cast<size_t>(p)];
    const float offset = region >= 0 ? region_offset[static_cast<size_t>(region)] : 0.0f;
    for (int64_t c = 0; c < 3; ++c) {
      const float base = cls < spec.num_classes ? pal[cls * 3 + c] : 0.5f;
      const float v = base + offset + a * noise[c * hw + p];
      image[c * hw + p] = std::clamp(v, 0.0f, 1.0f);
    }
  }
  return Tensor<float>::from_data({3, h, w}, std::move(image));
}

Tensor<float> class_prototypes(const SceneSpec& spec) {
  Rng rng(spec.seed, "prototypes");
  const int64_t k = spec.num_classes, c = spec.embed_channels;
  std::vector<float> protos(static_cast<size_t>(k * c));
  for (int64_t cls = 0; cls < k; ++cls) {
    for (;;) {
      double norm_sq = 0.0;
      std::vector<double> cand(static_cast<size_t>(c));
      for (auto& v : cand) {
        v = rng.normal();
        norm_sq += v * v;
      }
      if (norm_sq <= 0.0) continue;
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (int64_t d = 0; d < c; ++d) {
        protos[static_cast<size_t>(cls * c + d)] = static_cast<float>(cand[d] * inv);
      }
      // Re-draw on collision with an earlier prototype.
      bool distinct = true;
      for (int64_t o = 0; o < cls && distinct; ++o) {
        double dist_sq = 0.0;
        for (int64_t d = 0; d < c; ++d) {
          const double diff = protos[static_cast<size_t>(cls * c + d)] -
                              protos[static_cast<size_t>(o * c + d)];
          dist_sq += diff * diff;
        }
        distinct = dist_sq > 1e-12;
      }
      if (distinct) break;
    }
  }
  return Tensor<float>::from_data({k, c}, std::move(protos));
}

GeoEmbedding<float> gen_embedding(const LabelMap& labels, const SceneSpec& spec,
                                  Rng& rng, double noise_sigma) {
  const int64_t eh = spec.embed_height(), ew = spec.embed_width();
  const int64_t s = spec.embed_factor, c = spec.embed_channels;
  const Tensor<float> protos = class_prototypes(spec);
  const auto pv = protos.values();

  std::vector<float> values(static_cast<size_t>(c * eh * ew));
  std::vector<int64_t> votes(static_cast<size_t>(spec.num_classes));
  for (int64_t ey = 0; ey < eh; ++ey) {
    for (int64_t ex = 0; ex < ew; ++ex) {
      std::fill(votes.begin(), votes.end(), 0);
      for (int64_t y = ey * s; y < (ey + 1) * s; ++y) {
        for (int64_t x = ex * s; x < (ex + 1) * s; ++x) {
          ++votes[labels.at(y, x)];
        }
      }
      int64_t majority = 0;
      for (int64_t k = 1; k < spec.num_classes; ++k) {
        if (votes[static_cast<size_t>(k)] > votes[static_cast<size_t>(majority)]) {
          majority = k;
        }
      }

      // The swap candidate is drawn unconditionally so that datasets with
      // different drift probabilities share every other random draw.
      const double u = rng.uniform();
      const uint64_t other =
          rng.uniform_int(static_cast<uint64_t>(spec.num_classes - 1));
      int64_t cls = majority;
      if (u < spec.drift_prob) {
        cls = static_cast<int64_t>(other) + (static_cast<int64_t>(other) >= majority);
      }

      double norm_sq = 0.0;
      std::vector<double> vec(static_cast<size_t>(c));
      for (int64_t d = 0; d < c; ++d) {
        vec[static_cast<size_t>(d)] =
            static_cast<double>(pv[cls * c + d]) + rng.normal(0.0, noise_sigma);
        norm_sq += vec[static_cast<size_t>(d)] * vec[static_cast<size_t>(d)];
      }
      const double inv = norm_sq > 0.0 ? 1.0 / std::sqrt(norm_sq) : 0.0;
      for (int64_t d = 0; d < c; ++d) {
        values[static_cast<size_t>(d * eh * ew + ey * ew + ex)] =
            static_cast<float>(vec[static_cast<size_t>(d)] * inv);
      }
    }
  }
  GeoEmbedding<float> embedding;
  embedding.values = Tensor<float>::from_data({c, eh, ew}, std::move(values));
  return embedding;
}

Rng sample_rng(const SceneSpec& spec, int64_t sample_index) {
  return Rng(spec.seed, "sample").fork(static_cast<uint64_t>(sample_index));
}

GeoEmbedding<float> regen_embedding(const SceneSpec& spec, const LabelMap& labels,
                                    int64_t sample_index, double drift_prob) {
  SceneSpec drifted = spec;
  drifted.drift_prob = drift_prob;
  Rng rng = sample_rng(spec, sample_index).fork("embed");
  return gen_embedding(labels, drifted, rng);
}

namespace {

json scene_spec_to_json(const SceneSpec& spec) {
  return json{{"height", spec.height},
              {"width", spec.width},
              {"classes", spec.num_classes},
              {"cells", spec.num_cells},
              {"texture", spec.texture_amplitude},
              {"brightness", spec.brightness_jitter},
              {"embed_factor", spec.embed_factor},
              {"drift", spec.drift_prob},
              {"embed_channels", spec.embed_channels},
              {"seed", spec.seed}};
}

SceneSpec scene_spec_from_json(const json& j) {
  SceneSpec spec;
  spec.height = j.at("height").get<int64_t>();
  spec.width = j.at("width").get<int64_t>();
  spec.num_classes = j.at("classes").get<int64_t>();
  spec.num_cells = j.at("cells").get<int64_t>();
  spec.texture_amplitude = j.at("texture").get<double>();
  spec.brightness_jitter = j.at("brightness").get<double>();
  spec.embed_factor = j.at("embed_factor").get<int64_t>();
  spec.drift_prob = j.at("drift").get<double>();
  spec.embed_channels = j.at("embed_channels").get<int64_t>();
  spec.seed = j.at("seed").get<uint64_t>();
  return spec;
}

std::string sample_id(int64_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06lld", static_cast<long long>(index));
  return buf;
}

uint64_t file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return fnv1a64(bytes.data(), bytes.size());
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

DatasetIndex gen_dataset(const SceneSpec& spec, int64_t count, double train_ratio,
                         const std::filesystem::path& dir) {
  spec.validate();
  if (count < 2) throw ValidationError("gen_dataset: need at least 2 samples");
  if (train_ratio <= 0.0 || train_ratio >= 1.0) {
    throw ValidationError("gen_dataset: train ratio must be inside (0,1)");
  }
  std::filesystem::create_directories(dir / "samples");

  DatasetIndex index;
  index.root = dir;
  index.spec = spec;
  const int64_t train_count = std::llround(train_ratio * static_cast<double>(count));

  ordered_json checksums;
  for (int64_t i = 0; i < count; ++i) {
    const std::string id = sample_id(i);
    // Independent streams per stage let eval-time code regenerate any one
    // piece (drifted embeddings) without replaying the others.
    const Rng root = sample_rng(spec, i);
    Rng label_rng = root.fork("labels");
    Rng image_rng = root.fork("image");
    Rng embed_rng = root.fork("embed");
    const LabelMap labels = gen_labelmap(spec, label_rng);
    const Tensor<float> image = render_image(labels, spec, image_rng);
    const GeoEmbedding<float> embedding = gen_embedding(labels, spec, embed_rng);

    const auto sample_dir = dir / "samples" / id;
    std::filesystem::create_directories(sample_dir);
    save_tensor(sample_dir / "image.sst", image);
    save_tensor(sample_dir / "embed.sst", embedding.values);
    save_labels(sample_dir / "label.sst", labels);
    for (const char* name : {"image.sst", "embed.sst", "label.sst"}) {
      const std::string rel = "samples/" + id + "/" + name;
      checksums[rel] = hex64(file_checksum(sample_dir / name));
    }
    if (i < train_count) {
      index.train_ids.push_back(id);
    } else {
      index.test_ids.push_back(id);
    }
  }

  ordered_json meta;
  meta["format"] = "ssdm-dataset-v1";
  meta["spec"] = scene_spec_to_json(spec);
  meta["count"] = count;
  meta["train_ratio"] = train_ratio;
  meta["train_ids"] = index.train_ids;
  meta["test_ids"] = index.test_ids;
  meta["checksums"] = std::move(checksums);
  std::ofstream out(dir / "meta.json", std::ios::trunc);
  out << meta.dump(2) << "\n";
  if (!out) throw IoError("cannot write " + (dir / "meta.json").string());
  return index;
}

DatasetIndex open_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "meta.json");
  if (!in) throw IoError("no dataset at " + dir.string());
  json meta = json::parse(in);
  if (meta.value("format", "") != "ssdm-dataset-v1") {
    throw IoError("unrecognized dataset format in " + dir.string());
  }
  DatasetIndex index;
  index.root = dir;
  index.spec = scene_spec_from_json(meta.at("spec"));
  index.train_ids = meta.at("train_ids").get<std::vector<std::string>>();
  index.test_ids = meta.at("test_ids").get<std::vector<std::string>>();
  return index;
}

Sample load_sample(const DatasetIndex& index, const std::string& id) {
  const auto dir = index.root / "samples" / id;
  Sample sample;
  sample.id = id;
  sample.image = load_tensor_f32(dir / "image.sst");
  sample.embedding.values = load_tensor_f32(dir / "embed.sst");
  sample.embedding.tile_id = id;
  sample.labels = load_labels(dir / "label.sst");
  return sample;
}

std::vector<Sample> load_samples(const DatasetIndex& index,
                                 const std::vector<std::string>& ids) {
  std::vector<Sample> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(load_sample(index, id));
  return out;
}

std::vector<std::string> verify_dataset(const DatasetIndex& index) {
  std::ifstream in(index.root / "meta.json");
  if (!in) throw IoError("no dataset at " + index.root.string());
  json meta = json::parse(in);
  std::vector<std::string> corrupt;
  for (const auto& [rel, hash] : meta.at("checksums").items()) {
    const auto path = index.root / rel;
    if (!std::filesystem::exists(path) ||
        hex64(file_checksum(path)) != hash.get<std::string>()) {
      corrupt.push_back(rel);
    }
  }
  return corrupt;
}

void write_mask_p5(const std::filesystem::path& path, const LabelMap& labels,
                   int64_t num_classes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << labels.width << " " << labels.height << "\n255\n";
  const int64_t scale = num_classes > 1 ? 255 / (num_classes - 1) : 255;
  for (uint8_t v : labels.values) {
    const uint8_t gray = static_cast<uint8_t>(std::min<int64_t>(255, v * scale));
    out.put(static_cast<char>(gray));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ssdm
