#include <doctest.h>

#include <cmath>

#include "ssdm/gradcheck.hpp"
#include "ssdm/gradsuite.hpp"
#include "ssdm/ops.hpp"

using namespace ssdm;

TEST_CASE("matmul identity and hand example") {
  auto eye = TensorD::from_data({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Rng rng(1, "mm");
  auto b = normal_tensor<double>({3, 4}, rng, 0.0, 1.0);
  auto out = matmul(eye, b);
  for (int64_t i = 0; i < 12; ++i) CHECK(out.values()[i] == b.values()[i]);

  auto a = TensorD::from_data({2, 2}, {1, 2, 3, 4});
  auto v = TensorD::from_data({2, 1}, {0, 1});
  auto prod = matmul(a, v);
  CHECK(prod.values()[0] == 2.0);
  CHECK(prod.values()[1] == 4.0);

  CHECK_THROWS_AS(matmul(a, TensorD::zeros({3, 2})), DimensionError);
}

TEST_CASE("softmax matches direct scalar evaluation") {
  auto x = TensorD::from_data({3}, {1.0, 2.0, 3.0});
  auto y = softmax_lastdim(x);
  // Frozen from independent evaluation of exp(k)/sum(exp).
  CHECK(y.values()[0] == doctest::Approx(0.090030573170380462).epsilon(1e-12));
  CHECK(y.values()[1] == doctest::Approx(0.24472847105479767).epsilon(1e-12));
  CHECK(y.values()[2] == doctest::Approx(0.6652409557748219).epsilon(1e-12));

  auto uniform = softmax_lastdim(TensorD::zeros({3}));
  for (double v : uniform.values()) CHECK(v == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("softmax rows sum to one and shift invariance holds") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed, "softmax");
    auto x = normal_tensor<double>({4, 6}, rng, 0.0, 3.0);
    auto y = softmax_lastdim(x);
    for (int64_t r = 0; r < 4; ++r) {
      double total = 0.0;
      for (int64_t j = 0; j < 6; ++j) {
        const double v = y.values()[r * 6 + j];
        CHECK(v >= 0.0);
        total += v;
      }
      CHECK(std::abs(total - 1.0) <= 1e-6);
    }
    // Per-row constant shift leaves the output unchanged.
    const double c = rng.uniform(-10.0, 10.0);
    std::vector<double> shifted(x.values().begin(), x.values().end());
    for (auto& v : shifted) v += c;
    auto y2 = softmax_lastdim(TensorD::from_data({4, 6}, std::move(shifted)));
    for (int64_t i = 0; i < 24; ++i) {
      CHECK(std::abs(y.values()[i] - y2.values()[i]) <= 1e-6);
    }
  }
}

TEST_CASE("conv2d identity 1x1 and impulse response") {
  Rng rng(2, "conv");
  auto x = normal_tensor<double>({2, 4, 4}, rng, 0.0, 1.0);
  auto eye = TensorD::from_data({2, 2, 1, 1}, {1, 0, 0, 1});
  auto out = conv2d(x, eye, TensorD::zeros({2}), 1);
  for (int64_t i = 0; i < x.numel(); ++i) CHECK(out.values()[i] == x.values()[i]);

  // 3x3 all-ones kernel over a one-hot plane lights the 3x3 neighborhood.
  auto hot = TensorD::zeros({1, 5, 5});
  hot.mutable_values()[2 * 5 + 2] = 1.0;
  auto ones = TensorD::filled({1, 1, 3, 3}, 1.0);
  auto resp = conv2d(hot, ones, TensorD::zeros({1}), 1);
  for (int64_t y = 0; y < 5; ++y) {
    for (int64_t x2 = 0; x2 < 5; ++x2) {
      const double expected =
          (std::abs(y - 2) <= 1 && std::abs(x2 - 2) <= 1) ? 1.0 : 0.0;
      CHECK(resp.values()[y * 5 + x2] == expected);
    }
  }

  CHECK_THROWS_AS(conv2d(x, TensorD::zeros({2, 3, 1, 1}), TensorD::zeros({2}), 1),
                  DimensionError);
  CHECK_THROWS_AS(conv2d(x, eye, TensorD::zeros({2}), 3), ValidationError);
}

TEST_CASE("conv2d strides downsample as contracted") {
  Rng rng(3, "convs");
  auto x = normal_tensor<double>({1, 8, 8}, rng, 0.0, 1.0);
  auto w = normal_tensor<double>({1, 1, 3, 3}, rng, 0.0, 1.0);
  auto out2 = conv2d(x, w, TensorD::zeros({1}), 2);
  CHECK(out2.shape() == Shape{1, 4, 4});
  auto out4 = conv2d(x, w, TensorD::zeros({1}), 4);
  CHECK(out4.shape() == Shape{1, 2, 2});
}

TEST_CASE("resize_bilinear hand case and constant preservation") {
  auto x = TensorD::from_data({1, 2, 2}, {0, 1, 0, 1});
  auto up = resize_bilinear(x, 2, 4);
  const double expect[4] = {0.0, 0.25, 0.75, 1.0};
  for (int64_t j = 0; j < 4; ++j) {
    CHECK(up.values()[j] == doctest::Approx(expect[j]).epsilon(1e-12));
    CHECK(up.values()[4 + j] == doctest::Approx(expect[j]).epsilon(1e-12));
  }

  // Constants are reproduced exactly at any size.
  auto c = TensorD::filled({2, 3, 3}, 0.731);
  auto r = resize_bilinear(c, 7, 5);
  for (double v : r.values()) CHECK(v == 0.731);

  // Identity when the target equals the source size.
  Rng rng(4, "rsz");
  auto z = normal_tensor<double>({2, 4, 6}, rng, 0.0, 1.0);
  auto same = resize_bilinear(z, 4, 6);
  for (int64_t i = 0; i < z.numel(); ++i) CHECK(same.values()[i] == z.values()[i]);
}

TEST_CASE("concat_channels layout and gradient routing") {
  Rng rng(5, "cat");
  auto a = normal_tensor<double>({2, 4, 4}, rng, 0.0, 1.0, true);
  auto b = normal_tensor<double>({3, 4, 4}, rng, 0.0, 1.0, true);
  auto out = concat_channels(a, b);
  CHECK(out.shape() == Shape{5, 4, 4});
  CHECK(out.values()[0] == a.values()[0]);
  CHECK(out.values()[2 * 16] == b.values()[0]);

  sum(out).backward();
  for (double g : a.grad()) CHECK(g == 1.0);
  for (double g : b.grad()) CHECK(g == 1.0);

  auto empty = TensorD::zeros({0, 4, 4});
  auto same = concat_channels(a, empty);
  CHECK(same.shape() == Shape{2, 4, 4});
  CHECK_THROWS_AS(concat_channels(a, TensorD::zeros({1, 3, 4})), DimensionError);
}

TEST_CASE("add basics") {
  Rng rng(6, "add");
  auto a = normal_tensor<double>({3, 3}, rng, 0.0, 1.0, true);
  auto b = normal_tensor<double>({3, 3}, rng, 0.0, 1.0, true);
  auto zero = TensorD::zeros({3, 3});
  auto same = add(a, zero);
  for (int64_t i = 0; i < 9; ++i) CHECK(same.values()[i] == a.values()[i]);
  auto ab = add(a, b);
  auto ba = add(b, a);
  for (int64_t i = 0; i < 9; ++i) CHECK(ab.values()[i] == ba.values()[i]);
  sum(ab).backward();
  for (double g : a.grad()) CHECK(g == 1.0);
  CHECK_THROWS_AS(add(a, TensorD::zeros({2, 3})), DimensionError);
}

TEST_CASE("gelu fixed points") {
  auto x = TensorD::from_data({3}, {0.0, 10.0, -10.0});
  auto y = gelu(x);
  CHECK(y.values()[0] == 0.0);
  CHECK(y.values()[1] == doctest::Approx(10.0));
  CHECK(y.values()[2] == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("cross entropy uniform logits give ln K") {
  for (int64_t k : {2, 5, 9}) {
    auto logits = TensorD::zeros({k, 2, 2});
    LabelMap labels = LabelMap::zeros(2, 2);
    labels.values = {0, static_cast<uint8_t>(k - 1), 1, kIgnoreIndex};
    auto loss = cross_entropy(logits, labels);
    CHECK(loss.item() == doctest::Approx(std::log(static_cast<double>(k))).epsilon(1e-12));
  }
}

TEST_CASE("cross entropy rejects bad labels") {
  auto logits = TensorD::zeros({3, 2, 2});
  LabelMap labels = LabelMap::zeros(2, 2);
  labels.values = {0, 1, 3, 0};  // 3 out of range for K=3
  CHECK_THROWS_AS(cross_entropy(logits, labels), ValidationError);
  LabelMap ignored = LabelMap::zeros(2, 2);
  ignored.values = {kIgnoreIndex, kIgnoreIndex, kIgnoreIndex, kIgnoreIndex};
  CHECK_THROWS_AS(cross_entropy(logits, ignored), ValidationError);
}

TEST_CASE("l2 normalization contract") {
  Rng rng(8, "l2");
  auto x = normal_tensor<double>({4, 3, 3}, rng, 0.0, 1.0);
  auto y = l2_normalize_channels(x);
  for (int64_t p = 0; p < 9; ++p) {
    double sq = 0.0;
    for (int64_t c = 0; c < 4; ++c) sq += y.values()[c * 9 + p] * y.values()[c * 9 + p];
    CHECK(std::sqrt(sq) == doctest::Approx(1.0).epsilon(1e-6));
  }
  auto zeros = l2_normalize_channels(TensorD::zeros({4, 2, 2}));
  for (double v : zeros.values()) CHECK(v == 0.0);
}

TEST_CASE("matmul gradient matches finite differences") {
  Rng rng(42, "g");
  auto a = normal_tensor<double>({3, 4}, rng, 0.0, 1.0, true);
  auto b = normal_tensor<double>({4, 2}, rng, 0.0, 1.0, true);
  auto report = grad_check([&] { return sum(matmul(a, b)); }, {a, b});
  CHECK(report.pass(1e-4));
}

TEST_CASE("gradcheck suite passes on every operation") {
  // Quick pass here; the acceptance suite runs the full 20 instances.
  for (const auto& c : run_gradcheck_suite(20250810, 3)) {
    INFO(c.name, " max rel err ", c.max_rel_err);
    CHECK(c.pass);
  }
}
