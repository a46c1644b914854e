#include <doctest.h>

#include <cmath>

#include "ssdm/attention.hpp"
#include "ssdm/oracles.hpp"
#include "ssdm/ops.hpp"

using namespace ssdm;

TEST_CASE("zero queries and bias average each row") {
  Rng rng(1, "attn");
  auto v = normal_tensor<double>({4, 3, 5}, rng, 0.0, 1.0);
  auto zero = TensorD::zeros({4, 3, 5});
  auto bias = TensorD::zeros({15, 5});
  auto out = row_attention(zero, zero, v, bias, 2);
  const int64_t hw = 15;
  for (int64_t c = 0; c < 4; ++c) {
    for (int64_t i = 0; i < 3; ++i) {
      double mean = 0.0;
      for (int64_t j = 0; j < 5; ++j) mean += v.values()[c * hw + i * 5 + j];
      mean /= 5.0;
      for (int64_t j = 0; j < 5; ++j) {
        CHECK(out.values()[c * hw + i * 5 + j] == doctest::Approx(mean).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("per-pixel constant bias equals zero bias") {
  Rng rng(2, "attn2");
  auto q = normal_tensor<double>({4, 3, 4}, rng, 0.0, 1.0);
  auto k = normal_tensor<double>({4, 3, 4}, rng, 0.0, 1.0);
  auto v = normal_tensor<double>({4, 3, 4}, rng, 0.0, 1.0);
  auto zero_bias = TensorD::zeros({12, 4});
  std::vector<double> shifted(48);
  for (int64_t p = 0; p < 12; ++p) {
    const double c = rng.uniform(-4.0, 4.0);
    for (int64_t t = 0; t < 4; ++t) shifted[static_cast<size_t>(p * 4 + t)] = c;
  }
  auto a = row_attention(q, k, v, zero_bias, 2);
  auto b = row_attention(q, k, v, TensorD::from_data({12, 4}, std::move(shifted)), 2);
  for (int64_t i = 0; i < a.numel(); ++i) {
    CHECK(a.values()[i] == doctest::Approx(b.values()[i]).epsilon(1e-9));
  }
}

TEST_CASE("column attention over a single-row image is the identity") {
  Rng rng(3, "attn3");
  auto q = normal_tensor<double>({2, 1, 6}, rng, 0.0, 1.0);
  auto k = normal_tensor<double>({2, 1, 6}, rng, 0.0, 1.0);
  auto v = normal_tensor<double>({2, 1, 6}, rng, 0.0, 1.0);
  auto bias = normal_tensor<double>({6, 1}, rng, 0.0, 1.0);
  auto out = col_attention(q, k, v, bias, 2);
  for (int64_t i = 0; i < v.numel(); ++i) {
    CHECK(out.values()[i] == doctest::Approx(v.values()[i]).epsilon(1e-12));
  }
}

TEST_CASE("decomposed attention equals the naive loop reference") {
  for (auto [h, w] : {std::pair<int64_t, int64_t>{4, 5}, {5, 4}, {1, 3}, {6, 6}}) {
    Rng rng(static_cast<uint64_t>(h * 10 + w), "naive");
    const int64_t d = 6;
    auto q = normal_tensor<double>({d, h, w}, rng, 0.0, 1.0);
    auto k = normal_tensor<double>({d, h, w}, rng, 0.0, 1.0);
    auto v = normal_tensor<double>({d, h, w}, rng, 0.0, 1.0);
    auto gx = normal_tensor<double>({h * w, w}, rng, 0.0, 1.0);
    auto gy = normal_tensor<double>({h * w, h}, rng, 0.0, 1.0);
    auto fast = col_attention(q, k, row_attention(q, k, v, gx, 2), gy, 2);
    auto ref = oracles::naive_biased_axial_attention(q, k, v, gx, gy, 2);
    for (int64_t i = 0; i < fast.numel(); ++i) {
      CHECK(std::abs(fast.values()[i] - ref.values()[i]) <= 1e-6);
    }
  }
}

TEST_CASE("bias shape and head count are validated") {
  auto q = TensorD::zeros({4, 3, 4});
  CHECK_THROWS_AS(row_attention(q, q, q, TensorD::zeros({12, 3}), 2),
                  DimensionError);
  CHECK_THROWS_AS(row_attention(q, q, q, TensorD::zeros({12, 4}), 3),
                  ValidationError);
  CHECK_THROWS_AS(row_attention(q, q, TensorD::zeros({4, 3, 5}),
                                TensorD::zeros({12, 4}), 2),
                  DimensionError);
}

TEST_CASE("counted multiply-adds follow the closed form at two grid sizes") {
  Rng rng(4, "macs");
  for (auto [h, w] : {std::pair<int64_t, int64_t>{6, 8}, {12, 16}}) {
    const int64_t d = 8, heads = 2;
    auto q = normal_tensor<double>({d, h, w}, rng, 0.0, 1.0);
    auto k = normal_tensor<double>({d, h, w}, rng, 0.0, 1.0);
    auto v = normal_tensor<double>({d, h, w}, rng, 0.0, 1.0);
    auto gx = TensorD::zeros({h * w, w});
    auto gy = TensorD::zeros({h * w, h});
    uint64_t macs = 0;
    col_attention(q, k, row_attention(q, k, v, gx, heads, &macs), gy, heads, &macs);
    CHECK(macs == decomposed_attention_mac_formula(heads, d / heads, h, w));
  }
  // Theta(HW (H+W) d): doubling both extents scales the count by the formula.
  const uint64_t small = decomposed_attention_mac_formula(2, 4, 6, 8);
  const uint64_t large = decomposed_attention_mac_formula(2, 4, 12, 16);
  CHECK(large == small * 8);  // 4x pixels, 2x extent
}
