#include <doctest.h>

#include <cmath>

#include "ssdm/gradcheck.hpp"
#include "ssdm/prior.hpp"

using namespace ssdm;

namespace {

Tensor<double> unit_geometry(int64_t d, int64_t h, int64_t w, uint64_t seed) {
  Rng rng(seed, "geom");
  return l2_normalize_channels(normal_tensor<double>({d, h, w}, rng, 0.0, 1.0));
}

}  // namespace

TEST_CASE("identity projection preserves a unit one-hot field") {
  // 3-channel one-hot unit vectors through an identity 1x1 projection.
  GeoEmbedding<double> e;
  e.values = TensorD::zeros({3, 2, 2});
  auto vals = e.values.mutable_values();
  vals[0 * 4 + 0] = 1.0;  // pixel 0 -> channel 0
  vals[1 * 4 + 1] = 1.0;
  vals[2 * 4 + 2] = 1.0;
  vals[0 * 4 + 3] = 1.0;
  GeoAdapterWeights<double> w;
  w.proj_w = TensorD::from_data({3, 3, 1, 1}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  w.proj_b = TensorD::zeros({3});
  auto out = project_embedding(e, w);
  for (int64_t i = 0; i < 12; ++i) CHECK(out.values()[i] == e.values.values()[i]);
}

TEST_CASE("projection output is unit norm at every nonzero pixel") {
  Rng rng(5, "proj");
  GeoEmbedding<double> e;
  e.values = normal_tensor<double>({8, 4, 5}, rng, 0.0, 1.0);
  auto w = GeoAdapterWeights<double>::init(8, 4, 4, rng.fork("w"));
  auto out = project_embedding(e, w);
  const int64_t hw = 20;
  for (int64_t p = 0; p < hw; ++p) {
    double sq = 0.0;
    for (int64_t c = 0; c < 4; ++c) sq += out.values()[c * hw + p] * out.values()[c * hw + p];
    CHECK(std::sqrt(sq) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("resize_geometry_map identity and constant cases") {
  auto g = unit_geometry(4, 3, 5, 2);
  auto same = resize_geometry_map(g, 3, 5);
  for (int64_t i = 0; i < g.numel(); ++i) {
    CHECK(same.values()[i] == doctest::Approx(g.values()[i]).epsilon(1e-12));
  }

  // A constant unit field stays constant at any scale.
  auto c = TensorD::zeros({2, 2, 2});
  {
    auto vals = c.mutable_values();
    const double inv = 1.0 / std::sqrt(2.0);
    for (int64_t p = 0; p < 4; ++p) {
      vals[p] = inv;
      vals[4 + p] = inv;
    }
  }
  auto up = resize_geometry_map(c, 5, 7);
  for (int64_t p = 0; p < 35; ++p) {
    CHECK(up.values()[p] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(up.values()[35 + p] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("two-region field keeps region vectors under 2x downsampling") {
  // Left half points along +x, right half along +y; 4x4 -> 2x2 averages
  // within one region per output pixel, and renormalization restores units.
  auto g = TensorD::zeros({2, 4, 4});
  {
    auto vals = g.mutable_values();
    for (int64_t y = 0; y < 4; ++y) {
      for (int64_t x = 0; x < 4; ++x) {
        if (x < 2) vals[0 * 16 + y * 4 + x] = 1.0;
        else vals[1 * 16 + y * 4 + x] = 1.0;
      }
    }
  }
  auto down = resize_geometry_map(g, 2, 2);
  // pixel (0,0) and (1,0) are pure left-region; (0,1),(1,1) pure right.
  CHECK(down.values()[0 * 4 + 0] == doctest::Approx(1.0));
  CHECK(down.values()[1 * 4 + 0] == doctest::Approx(0.0));
  CHECK(down.values()[0 * 4 + 1] == doctest::Approx(0.0));
  CHECK(down.values()[1 * 4 + 1] == doctest::Approx(1.0));
}

TEST_CASE("constant field affinities equal tau") {
  auto c = TensorD::zeros({2, 2, 3});
  {
    auto vals = c.mutable_values();
    const double inv = 1.0 / std::sqrt(2.0);
    for (int64_t i = 0; i < 12; ++i) vals[i] = inv;
  }
  auto tau = TensorD::scalar(1.0);
  auto [gx, gy] = directional_affinities(c, tau);
  for (double v : gx.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : gy.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("orthogonal alternating vectors give a checkerboard of tau and zero") {
  // One row of width 4 alternating between e0 and e1.
  auto g = TensorD::zeros({2, 1, 4});
  {
    auto vals = g.mutable_values();
    vals[0 * 4 + 0] = 1.0;
    vals[1 * 4 + 1] = 1.0;
    vals[0 * 4 + 2] = 1.0;
    vals[1 * 4 + 3] = 1.0;
  }
  auto tau = TensorD::scalar(0.7);
  auto [gx, gy] = directional_affinities(g, tau);
  for (int64_t p = 0; p < 4; ++p) {
    for (int64_t t = 0; t < 4; ++t) {
      const double expect = (p % 2 == t % 2) ? 0.7 : 0.0;
      CHECK(gx.values()[p * 4 + t] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("directional slices equal the materialized oracle bitwise") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed, "slice");
    const int64_t h = 1 + static_cast<int64_t>(rng.uniform_int(8));
    const int64_t w = 1 + static_cast<int64_t>(rng.uniform_int(8));
    auto g = unit_geometry(3, h, w, seed + 100);
    auto tau = TensorD::scalar(rng.uniform(0.3, 2.5));
    auto [gx, gy] = directional_affinities(g, tau);
    auto full = materialize_full_affinity(g, tau);
    const int64_t hw = h * w;
    for (int64_t i = 0; i < h; ++i) {
      for (int64_t j = 0; j < w; ++j) {
        const int64_t p = i * w + j;
        for (int64_t t = 0; t < w; ++t) {
          CHECK(gx.values()[p * w + t] == full.values()[p * hw + i * w + t]);
        }
        for (int64_t t = 0; t < h; ++t) {
          CHECK(gy.values()[p * h + t] == full.values()[p * hw + t * w + j]);
        }
      }
    }
  }
}

TEST_CASE("materialized affinity is symmetric with tau diagonal") {
  auto g = unit_geometry(4, 3, 3, 9);
  auto tau = TensorD::scalar(1.3);
  auto full = materialize_full_affinity(g, tau);
  const int64_t hw = 9;
  for (int64_t p = 0; p < hw; ++p) {
    CHECK(full.values()[p * hw + p] == doctest::Approx(1.3).epsilon(1e-9));
    for (int64_t q = 0; q < hw; ++q) {
      CHECK(full.values()[p * hw + q] == full.values()[q * hw + p]);
    }
  }

  auto single = materialize_full_affinity(unit_geometry(2, 1, 1, 1),
                                          TensorD::scalar(0.4));
  CHECK(single.numel() == 1);
  CHECK(single.values()[0] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("materialization guard rejects large grids") {
  auto g = TensorD::zeros({1, 65, 65});
  CHECK_THROWS_AS(materialize_full_affinity(g, TensorD::scalar(1.0)),
                  ValidationError);
}

TEST_CASE("unit-norm maps give biases bounded by tau") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed, "bound");
    auto g = unit_geometry(5, 4, 6, seed + 7);
    const double tau_v = rng.uniform(0.1, 3.0);
    auto [gx, gy] = directional_affinities(g, TensorD::scalar(tau_v));
    for (double v : gx.values()) CHECK(std::abs(v) <= tau_v + 1e-9);
    for (double v : gy.values()) CHECK(std::abs(v) <= tau_v + 1e-9);
  }
}

TEST_CASE("zero pixels contribute zero bias") {
  auto g = TensorD::zeros({3, 2, 2});
  g.mutable_values()[0] = 1.0;  // only pixel 0 is nonzero
  auto [gx, gy] = directional_affinities(g, TensorD::scalar(2.0));
  CHECK(gx.values()[0] == 2.0);  // self affinity of the nonzero pixel
  CHECK(gx.values()[1] == 0.0);
  CHECK(gy.values()[1] == 0.0);
}

TEST_CASE("gradients flow through projection and affinities") {
  Rng rng(3, "pg");
  GeoEmbedding<double> e;
  e.values = normal_tensor<double>({4, 3, 3}, rng, 0.0, 1.0, true);
  GeoAdapterWeights<double> w;
  w.proj_w = normal_tensor<double>({3, 4, 1, 1}, rng, 0.0, 0.7, true);
  w.proj_b = normal_tensor<double>({3}, rng, 0.0, 0.1, true);
  auto tau = TensorD::scalar(1.1, true);
  Rng wr = rng.fork("weights");
  auto loss_fn = [&] {
    auto projected = project_embedding(e, w);
    auto [gx, gy] = directional_affinities(projected, tau);
    Rng r1 = wr.fork("x");
    Rng r2 = wr.fork("y");
    return add(sum(mul(gx, uniform_tensor<double>(gx.shape(), r1, 0.5, 1.5))),
               sum(mul(gy, uniform_tensor<double>(gy.shape(), r2, 0.5, 1.5))));
  };
  auto report = grad_check(loss_fn, {e.values, w.proj_w, w.proj_b, tau});
  INFO("max rel err ", report.max_rel_err);
  CHECK(report.pass(1e-4));
}
