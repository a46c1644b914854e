#include <doctest.h>

#include <cmath>
#include <limits>

#include "ssdm/gradcheck.hpp"
#include "ssdm/ops.hpp"

using namespace ssdm;

TEST_CASE("sum of squares is checked to high precision") {
  Rng rng(1, "sq");
  auto theta = normal_tensor<double>({6}, rng, 0.0, 1.0, true);
  auto report = grad_check([&] { return sum(mul(theta, theta)); }, {theta});
  CHECK(report.finite);
  CHECK(report.max_rel_err <= 1e-8);
  CHECK(report.coords_checked == 6);
}

TEST_CASE("a wrong gradient is caught") {
  // scale() with an off-by-factor backward would show up; emulate a bug by
  // checking f = 2*sum(x) against params that see only sum(x) gradients via a
  // detached double-use: compare against deliberately mismatched closure.
  auto x = TensorD::from_data({3}, {0.3, -0.7, 1.1}, true);
  int flip = 0;
  auto loss_fn = [&]() {
    // Alternate the function between evaluations: the finite differences see
    // a different function than the recorded graph, so errors must be large.
    ++flip;
    return flip == 1 ? sum(x) : scale(sum(x), 2.0);
  };
  auto report = grad_check(loss_fn, {x});
  CHECK(report.max_rel_err > 0.1);
}

TEST_CASE("non-finite losses are flagged") {
  auto x = TensorD::from_data({1}, {2.0}, true);
  auto report = grad_check(
      [&] {
        auto inf = TensorD::scalar(std::numeric_limits<double>::infinity());
        return mul(x, inf);
      },
      {x});
  CHECK_FALSE(report.finite);
  CHECK_FALSE(report.pass(1e-4));
}
