#include "ssdm/commands.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "ssdm/bench.hpp"
#include "ssdm/checkpoint.hpp"
#include "ssdm/experiment.hpp"
#include "ssdm/gradsuite.hpp"
#include "ssdm/oracles.hpp"

namespace ssdm {

namespace {

double pct(double fraction) { return 100.0 * fraction; }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace

int cmd_gen_data(const RunConfig& config, std::ostream& out) {
  const DatasetIndex index = gen_dataset(config.scene, config.dataset.count,
                                         config.dataset.train_ratio,
                                         config.dataset.path);
  out << "dataset " << config.dataset.path << ": " << index.train_ids.size()
      << " train + " << index.test_ids.size() << " test tiles, "
      << config.scene.height << "x" << config.scene.width << ", "
      << config.scene.num_classes << " classes (config " << config.config_hash
      << ", seed " << config.seed << ")\n";
  return 0;
}

int cmd_train(const RunConfig& config, const std::string& variant, std::ostream& out) {
  const DatasetIndex index = open_dataset(config.dataset.path);
  const Variant v = variant.empty() ? config.model.variant
                                    : variant_from_string(variant);
  TrainOutput trained = train_variant(index, config, v, &out);
  save_checkpoint(config.paths.checkpoint, trained.weights, config.config_hash);
  write_loss_csv(config.paths.loss_csv, trained.stats);
  out << "checkpoint " << config.paths.checkpoint << ", loss curve "
      << config.paths.loss_csv << " (config " << config.config_hash << ", seed "
      << config.seed << ")\n";
  return 0;
}

int cmd_eval(const RunConfig& config, std::ostream& out) {
  const DatasetIndex index = open_dataset(config.dataset.path);
  const SegNetWeights<float> weights = load_checkpoint(config.paths.checkpoint);
  if (weights.config.num_classes != index.spec.num_classes) {
    throw ConfigError("checkpoint expects " +
                      std::to_string(weights.config.num_classes) +
                      " classes, dataset has " +
                      std::to_string(index.spec.num_classes));
  }
  const SegReport report =
      evaluate_model(weights, index, config.eval.drift, config.config_hash);
  write_text_file(config.paths.report, seg_report_to_json(report));

  if (config.eval.export_masks) {
    std::filesystem::create_directories(config.paths.masks_dir);
    for (const auto& id : index.test_ids) {
      const Sample sample = load_sample(index, id);
      write_mask_p5(std::filesystem::path(config.paths.masks_dir) / (id + "_pred.pgm"),
                    predict_sample(weights, sample), index.spec.num_classes);
      write_mask_p5(std::filesystem::path(config.paths.masks_dir) / (id + "_gt.pgm"),
                    sample.labels, index.spec.num_classes);
    }
  }

  out << std::fixed << std::setprecision(2);
  out << "variant " << report.variant << ": OA " << pct(report.metrics.oa)
      << ", mIoU " << pct(report.metrics.miou) << ", mAcc " << pct(report.metrics.macc)
      << ", fragmentation " << std::setprecision(3) << report.fragmentation
      << " (report " << config.paths.report << ")\n";
  out.flush();
  std::fprintf(stderr, "eval wall time: %.2f s\n", report.wall_time_s);
  return 0;
}

int cmd_gradcheck(const RunConfig& config, std::ostream& out) {
  const auto cases = run_gradcheck_suite(config.seed, 20);
  bool all_pass = true;
  out << "gradient checks (central differences, eps 1e-5, 64-bit, 20 instances):\n";
  for (const auto& c : cases) {
    all_pass = all_pass && c.pass;
    out << "  " << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  max rel err "
        << std::scientific << std::setprecision(2) << c.max_rel_err
        << std::defaultfloat << " over " << c.coords << " coords\n";
  }
  out << (all_pass ? "all gradient checks passed\n" : "gradient checks FAILED\n");
  return all_pass ? 0 : 1;
}

int cmd_oracle(const RunConfig& config, std::ostream& out) {
  const auto checks = oracles::run_oracle_suite(config.seed);
  bool all_pass = true;
  for (const auto& c : checks) {
    all_pass = all_pass && c.pass;
    out << "  " << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  (" << c.detail
        << ")\n";
  }
  out << (all_pass ? "all oracle checks passed\n" : "oracle checks FAILED\n");
  return all_pass ? 0 : 1;
}

int cmd_bench(const RunConfig& config, std::ostream& out) {
  std::vector<AttentionBenchResult> results;
  for (const auto& [h, w] : config.bench.grids) {
    results.push_back(
        bench_attention(h, w, config.bench.latent, config.bench.heads, config.seed));
  }
  const std::string json = bench_results_to_json(results, config.config_hash,
                                                 config.seed);
  write_text_file(config.paths.report, json);
  out << json;
  for (const auto& r : results) {
    if (r.counted_macs != r.formula_macs) {
      out << "MAC count mismatch at " << r.height << "x" << r.width << "\n";
      return 1;
    }
  }
  return 0;
}

int cmd_export_masks(const RunConfig& config, std::ostream& out) {
  const DatasetIndex index = open_dataset(config.dataset.path);
  const SegNetWeights<float> weights = load_checkpoint(config.paths.checkpoint);
  std::filesystem::create_directories(config.paths.masks_dir);
  for (const auto& id : index.test_ids) {
    const Sample sample = load_sample(index, id);
    write_mask_p5(std::filesystem::path(config.paths.masks_dir) / (id + "_pred.pgm"),
                  predict_sample(weights, sample), index.spec.num_classes);
    write_mask_p5(std::filesystem::path(config.paths.masks_dir) / (id + "_gt.pgm"),
                  sample.labels, index.spec.num_classes);
  }
  out << "wrote " << 2 * index.test_ids.size() << " masks to "
      << config.paths.masks_dir << "\n";
  return 0;
}

}  // namespace ssdm
