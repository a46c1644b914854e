#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ssdm {

struct AttentionBenchResult {
  int64_t height = 0, width = 0;
  int64_t latent = 0, heads = 0;
  uint64_t counted_macs = 0;   // instrumented decomposed core
  uint64_t formula_macs = 0;   // h * HW * (H+W) * (2*d_head+1)
  double decomposed_ms = 0.0;
  double full_ms = 0.0;        // materialized HW x HW attention, same inputs
};

// Times the biased decomposed row+column attention against a materialized
// full-matrix attention on identical Q/K/V and the same structural prior.
// The full variant only runs when HW fits the materialization guard.
AttentionBenchResult bench_attention(int64_t height, int64_t width, int64_t latent,
                                     int64_t heads, uint64_t seed);

std::string bench_results_to_json(const std::vector<AttentionBenchResult>& results,
                                  const std::string& config_hash, uint64_t seed);

}  // namespace ssdm
