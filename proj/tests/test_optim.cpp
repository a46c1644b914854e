#include <doctest.h>

#include "ssdm/optim.hpp"
#include "ssdm/ops.hpp"

using namespace ssdm;

TEST_CASE("zero gradient and zero decay leave parameters unchanged") {
  auto p = TensorD::from_data({3}, {1.0, -2.0, 0.5}, true);
  p.zero_grad();
  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  AdamW<double> opt({p}, cfg);
  opt.step();
  CHECK(p.values()[0] == 1.0);
  CHECK(p.values()[1] == -2.0);
  CHECK(p.values()[2] == 0.5);
}

TEST_CASE("one step on a quadratic decreases the objective") {
  auto theta = TensorD::from_data({1}, {1.0}, true);
  AdamWConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.weight_decay = 0.0;
  AdamW<double> opt({theta}, cfg);
  auto loss = [&] { return scale(mul(theta, theta), 0.5); };
  const double before = loss().item();
  opt.zero_grad();
  loss().backward();
  opt.step();
  CHECK(loss().item() < before);
}

TEST_CASE("trajectory matches the hand-stepped reference") {
  // f(t) = t0^2 + 2 t1^2 from (1, -0.5); lr 0.1, wd 0.1.
  // Expected values frozen from an independent execution of the decoupled
  // update rule.
  auto theta = TensorD::from_data({2}, {1.0, -0.5}, true);
  AdamWConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.weight_decay = 0.1;
  AdamW<double> opt({theta}, cfg);

  const double expected[3][2] = {
      {0.89000000049999994, -0.3950000005},
      {0.7815718559365048, -0.29233870322270744},
      {0.6751012216400698, -0.19341560270340274},
  };
  for (int step = 0; step < 3; ++step) {
    opt.zero_grad();
    auto weights = TensorD::from_data({2}, {1.0, 2.0});
    sum(mul(weights, mul(theta, theta))).backward();
    opt.step();
    CHECK(theta.values()[0] == doctest::Approx(expected[step][0]).epsilon(1e-12));
    CHECK(theta.values()[1] == doctest::Approx(expected[step][1]).epsilon(1e-12));
  }
}

TEST_CASE("missing gradient is a validation error") {
  auto p = TensorD::from_data({2}, {1.0, 2.0}, true);
  AdamW<double> opt({p}, {});
  CHECK_THROWS_AS(opt.step(), ValidationError);
}

TEST_CASE("moment buffers match parameter shapes") {
  auto p = TensorD::zeros({4, 5}, true);
  AdamW<double> opt({p}, {});
  p.zero_grad();
  opt.step();  // exercises the buffers at full extent
  CHECK(opt.step_count() == 1);
}
