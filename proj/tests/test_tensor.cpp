#include <doctest.h>

#include <cstring>
#include <filesystem>

#include "ssdm/ops.hpp"
#include "ssdm/sst1.hpp"

using namespace ssdm;

TEST_CASE("shape bookkeeping") {
  auto t = TensorF::zeros({2, 3, 4});
  CHECK(t.numel() == 24);
  CHECK(t.ndim() == 3);
  CHECK(format_shape(t.shape()) == "(2, 3, 4)");
  CHECK_THROWS_AS(TensorF::from_data({2, 2}, {1.0f, 2.0f, 3.0f}), DimensionError);
}

TEST_CASE("backward through a small graph") {
  auto a = TensorD::from_data({2}, {1.0, 2.0}, true);
  auto b = TensorD::from_data({2}, {3.0, -1.0}, true);
  // loss = sum(a*b + a) -> d/da = b + 1, d/db = a
  auto loss = sum(add(mul(a, b), a));
  loss.backward();
  CHECK(a.grad()[0] == doctest::Approx(4.0));
  CHECK(a.grad()[1] == doctest::Approx(0.0));
  CHECK(b.grad()[0] == doctest::Approx(1.0));
  CHECK(b.grad()[1] == doctest::Approx(2.0));
}

TEST_CASE("grad accumulates across uses of the same tensor") {
  auto a = TensorD::from_data({1}, {3.0}, true);
  auto loss = sum(mul(a, a));  // d/da = 2a
  loss.backward();
  CHECK(a.grad()[0] == doctest::Approx(6.0));
}

TEST_CASE("no-grad mode skips graph recording") {
  auto a = TensorD::from_data({2}, {1.0, 2.0}, true);
  NoGradGuard guard;
  auto out = add(a, a);
  CHECK_FALSE(out.requires_grad());
}

TEST_CASE("backward requires a scalar") {
  auto a = TensorD::from_data({2}, {1.0, 2.0}, true);
  CHECK_THROWS_AS(add(a, a).backward(), ValidationError);
}

TEST_CASE("reshape round-trips gradients") {
  auto a = TensorD::from_data({2, 3}, {1, 2, 3, 4, 5, 6}, true);
  auto loss = sum(a.reshape({3, 2}));
  loss.backward();
  for (double g : a.grad()) CHECK(g == doctest::Approx(1.0));
  CHECK_THROWS_AS(a.reshape({4, 2}), DimensionError);
}

TEST_CASE("forward evaluation is bit-stable across repeats") {
  Rng rng(99, "det");
  auto x = normal_tensor<float>({3, 6, 5}, rng, 0.0, 1.0);
  auto w = normal_tensor<float>({4, 3, 3, 3}, rng, 0.0, 0.5);
  auto b = normal_tensor<float>({4}, rng, 0.0, 0.1);
  auto first = conv2d(x, w, b, 1);
  auto second = conv2d(x, w, b, 1);
  CHECK(std::memcmp(first.values().data(), second.values().data(),
                    sizeof(float) * first.numel()) == 0);
}

TEST_CASE("random op chains stay finite") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed, "finite");
    auto x = normal_tensor<double>({2, 4, 4}, rng, 0.0, 2.0, true);
    auto w = normal_tensor<double>({3, 2, 3, 3}, rng, 0.0, 1.0, true);
    auto b = normal_tensor<double>({3}, rng, 0.0, 1.0, true);
    auto y = gelu(conv2d(x, w, b, 1));
    y = softmax_lastdim(resize_bilinear(y, 3, 7));
    auto loss = sum(y);
    loss.backward();
    for (double v : y.values()) CHECK(std::isfinite(v));
    for (double g : x.grad()) CHECK(std::isfinite(g));
  }
}

TEST_CASE("sst1 round trip is bit exact") {
  const auto dir = std::filesystem::temp_directory_path() / "ssdm_sst1_test";
  std::filesystem::create_directories(dir);

  Rng rng(7, "sst1");
  auto f32 = normal_tensor<float>({3, 4, 5}, rng, 0.0, 1.0);
  save_tensor(dir / "a.sst", f32);
  auto f32_back = load_tensor_f32(dir / "a.sst");
  REQUIRE(same_shape(f32.shape(), f32_back.shape()));
  CHECK(std::memcmp(f32.values().data(), f32_back.values().data(),
                    sizeof(float) * f32.numel()) == 0);

  auto f64 = normal_tensor<double>({7}, rng, 0.0, 3.0);
  save_tensor(dir / "b.sst", f64);
  auto f64_back = load_tensor_f64(dir / "b.sst");
  CHECK(std::memcmp(f64.values().data(), f64_back.values().data(),
                    sizeof(double) * f64.numel()) == 0);

  LabelMap labels = LabelMap::zeros(3, 5);
  for (size_t i = 0; i < labels.values.size(); ++i) {
    labels.values[i] = static_cast<uint8_t>(i % 251);
  }
  save_labels(dir / "c.sst", labels);
  const LabelMap labels_back = load_labels(dir / "c.sst");
  CHECK(labels_back.values == labels.values);

  SUBCASE("header layout") {
    const Sst1Blob blob = read_sst1(dir / "a.sst");
    CHECK(blob.dtype == Sst1Dtype::f32);
    CHECK(blob.shape == Shape{3, 4, 5});
    std::ifstream in(dir / "a.sst", std::ios::binary);
    char head[6];
    in.read(head, 6);
    CHECK(std::memcmp(head, "SST1", 4) == 0);
    CHECK(head[4] == 0);  // f32 dtype code
    CHECK(head[5] == 3);  // ndim
  }

  SUBCASE("dtype mismatch is rejected") {
    CHECK_THROWS_AS(load_tensor_f64(dir / "a.sst"), IoError);
  }
  SUBCASE("corrupt magic is rejected") {
    std::ofstream bad(dir / "bad.sst", std::ios::binary);
    bad << "NOPE";
    bad.close();
    CHECK_THROWS_AS(read_sst1(dir / "bad.sst"), IoError);
  }
}
