#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ssdm/labelmap.hpp"
#include "ssdm/prior.hpp"
#include "ssdm/rng.hpp"
#include "ssdm/tensor.hpp"

namespace ssdm {

// Parameters of the synthetic Voronoi-scene family. The coarse embedding grid
// carries region-level class identity; texture and brightness knobs create
// the intra-class variance that fragments texture-only models.
struct SceneSpec {
  int64_t height = 64;
  int64_t width = 64;
  int64_t num_classes = 6;
  int64_t num_cells = 12;          // Voronoi sites, >= num_classes
  double texture_amplitude = 0.4;  // per-pixel smoothed noise
  double brightness_jitter = 0.3;  // per-cell luminance offset
  int64_t embed_factor = 8;        // embedding grid is (H/s, W/s)
  double drift_prob = 0.0;         // per-cell prototype swap probability
  int64_t embed_channels = 64;
  uint64_t seed = 0;

  void validate() const;
  int64_t embed_height() const { return height / embed_factor; }
  int64_t embed_width() const { return width / embed_factor; }
};

// Voronoi partition into num_cells sites with class assignments; every class
// appears when num_cells >= num_classes.
LabelMap gen_labelmap(const SceneSpec& spec, Rng& rng);

// Class base color + per-cell luminance offset + smoothed per-pixel noise,
// clamped to [0,1]. Cells are the connected regions of the label map.
Tensor<float> render_image(const LabelMap& labels, const SceneSpec& spec, Rng& rng);

// One unit-norm class prototype per coarse cell (majority vote over the s*s
// block), Gaussian-perturbed and renormalized; drifted cells swap to a
// different class's prototype. The rng call sequence does not depend on
// drift_prob, so datasets differing only in drift differ only in swapped
// cells.
GeoEmbedding<float> gen_embedding(const LabelMap& labels, const SceneSpec& spec,
                                  Rng& rng, double noise_sigma = 0.05);

// The embedding a dataset sample would have had at a different drift
// probability, bit-reproducing the generator's stream.
GeoEmbedding<float> regen_embedding(const SceneSpec& spec, const LabelMap& labels,
                                    int64_t sample_index, double drift_prob);

// The per-dataset class prototypes, unit-norm rows [K, embed_channels];
// pairwise distinct (re-drawn on collision). Pure function of the spec seed.
Tensor<float> class_prototypes(const SceneSpec& spec);

// Per-class base colors [K, 3], pure function of the spec seed.
Tensor<float> class_palette(const SceneSpec& spec);

struct Sample {
  std::string id;
  Tensor<float> image;             // [3,H,W]
  GeoEmbedding<float> embedding;   // [C_e,H/s,W/s]
  LabelMap labels;
};

struct DatasetIndex {
  std::filesystem::path root;
  SceneSpec spec;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

// Writes samples/<id>/{image,embed,label}.sst plus meta.json with the spec,
// the split lists and a checksum manifest. Byte-identical for identical
// inputs.
DatasetIndex gen_dataset(const SceneSpec& spec, int64_t count, double train_ratio,
                         const std::filesystem::path& dir);

DatasetIndex open_dataset(const std::filesystem::path& dir);
Sample load_sample(const DatasetIndex& index, const std::string& id);
std::vector<Sample> load_samples(const DatasetIndex& index,
                                 const std::vector<std::string>& ids);

// Verifies the checksum manifest; returns the ids of corrupt files.
std::vector<std::string> verify_dataset(const DatasetIndex& index);

// Binary NetPBM (P5) export of a label map, classes stretched over 0..255.
void write_mask_p5(const std::filesystem::path& path, const LabelMap& labels,
                   int64_t num_classes);

// Per-sample generator stream, derived from (dataset seed, sample index).
Rng sample_rng(const SceneSpec& spec, int64_t sample_index);

}  // namespace ssdm
