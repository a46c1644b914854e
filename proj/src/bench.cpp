#include "ssdm/bench.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>

#include <nlohmann/json.hpp>

#include "ssdm/attention.hpp"
#include "ssdm/gemm.hpp"
#include "ssdm/prior.hpp"

namespace ssdm {

namespace {

// Attention over the full HW x HW pixel grid with the materialized affinity
// as additive bias. Exists only as the cost baseline for the decomposed form.
std::vector<float> full_attention(const Tensor<float>& q, const Tensor<float>& k,
                                  const Tensor<float>& v, const Tensor<float>& bias,
                                  int64_t heads) {
  const int64_t d = q.dim(0), hw = q.dim(1) * q.dim(2);
  const int64_t dh = d / heads;
  const float scale = 1.0f / std::sqrt(static_cast<float>(dh));
  const auto qv = q.values();
  const auto kv = k.values();
  const auto vv = v.values();
  const auto bv = bias.values();

  std::vector<float> out(static_cast<size_t>(d * hw), 0.0f);
  std::vector<float> qh(static_cast<size_t>(hw * dh)), kh(qh.size()), vh(qh.size()),
      oh(qh.size());
  std::vector<float> logits(static_cast<size_t>(hw) * static_cast<size_t>(hw));

  for (int64_t head = 0; head < heads; ++head) {
    for (int64_t p = 0; p < hw; ++p) {
      for (int64_t c = 0; c < dh; ++c) {
        qh[p * dh + c] = qv[(head * dh + c) * hw + p];
        kh[p * dh + c] = kv[(head * dh + c) * hw + p];
        vh[p * dh + c] = vv[(head * dh + c) * hw + p];
      }
    }
    std::fill(logits.begin(), logits.end(), 0.0f);
    gemm_nt(qh.data(), kh.data(), logits.data(), hw, dh, hw);
    for (int64_t p = 0; p < hw; ++p) {
      float* row = logits.data() + p * hw;
      const float* brow = bv.data() + p * hw;
      float mx = row[0] * scale + brow[0];
      row[0] = mx;
      for (int64_t t = 1; t < hw; ++t) {
        row[t] = row[t] * scale + brow[t];
        mx = std::max(mx, row[t]);
      }
      float denom = 0.0f;
      for (int64_t t = 0; t < hw; ++t) {
        row[t] = std::exp(row[t] - mx);
        denom += row[t];
      }
      const float inv = 1.0f / denom;
      for (int64_t t = 0; t < hw; ++t) row[t] *= inv;
    }
    std::fill(oh.begin(), oh.end(), 0.0f);
    gemm_nn(logits.data(), vh.data(), oh.data(), hw, hw, dh);
    for (int64_t p = 0; p < hw; ++p) {
      for (int64_t c = 0; c < dh; ++c) {
        out[(head * dh + c) * hw + p] = oh[p * dh + c];
      }
    }
  }
  return out;
}

double best_of_ms(int runs, const std::function<void()>& fn) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < runs; ++i) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    best = std::min(best, ms);
  }
  return best;
}

}  // namespace

AttentionBenchResult bench_attention(int64_t height, int64_t width, int64_t latent,
                                     int64_t heads, uint64_t seed) {
  AttentionBenchResult result;
  result.height = height;
  result.width = width;
  result.latent = latent;
  result.heads = heads;
  const int64_t dh = latent / heads;
  result.formula_macs = decomposed_attention_mac_formula(heads, dh, height, width);

  NoGradGuard no_grad;
  Rng rng(seed, "bench");
  auto q = normal_tensor<float>({latent, height, width}, rng, 0.0, 1.0);
  auto k = normal_tensor<float>({latent, height, width}, rng, 0.0, 1.0);
  auto v = normal_tensor<float>({latent, height, width}, rng, 0.0, 1.0);
  auto geometry = l2_normalize_channels(
      normal_tensor<float>({8, height, width}, rng, 0.0, 1.0));
  auto tau = Tensor<float>::scalar(1.0f);
  auto [gx, gy] = directional_affinities(geometry, tau);

  // One counted pass, then timed passes without instrumentation.
  uint64_t macs = 0;
  col_attention(q, k, row_attention(q, k, v, gx, heads, &macs), gy, heads, &macs);
  result.counted_macs = macs;

  result.decomposed_ms = best_of_ms(3, [&] {
    col_attention(q, k, row_attention(q, k, v, gx, heads), gy, heads);
  });

  if (height * width <= 4096) {
    auto full_bias = materialize_full_affinity(geometry, tau);
    result.full_ms = best_of_ms(3, [&] { full_attention(q, k, v, full_bias, heads); });
  }
  return result;
}

std::string bench_results_to_json(const std::vector<AttentionBenchResult>& results,
                                  const std::string& config_hash, uint64_t seed) {
  nlohmann::ordered_json j;
  j["format"] = "ssdm-bench-v1";
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  auto grids = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json g;
    g["height"] = r.height;
    g["width"] = r.width;
    g["latent"] = r.latent;
    g["heads"] = r.heads;
    g["counted_macs"] = r.counted_macs;
    g["formula_macs"] = r.formula_macs;
    g["decomposed_ms"] = r.decomposed_ms;
    g["full_ms"] = r.full_ms;
    grids.push_back(std::move(g));
  }
  j["grids"] = std::move(grids);
  return j.dump(2) + "\n";
}

}  // namespace ssdm
