#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ssdm/tensor.hpp"

namespace ssdm {

struct GradCheckReport {
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  int64_t worst_param = -1;
  int64_t worst_index = -1;
  int64_t coords_checked = 0;
  bool finite = true;

  bool pass(double tol) const { return finite && max_rel_err <= tol; }
};

// Central-difference check of d(loss)/d(theta) for every coordinate of every
// parameter. `loss_fn` must rebuild the graph from the parameters' current
// values; it is evaluated 2 * coords + 1 times. Relative error uses a unit
// floor, err = |a - n| / max(1, |a|, |n|), so coordinates with near-zero
// gradients are judged on absolute error. Run with Tensor<double>; finite
// differences at eps=1e-5 are meaningless in single precision.
GradCheckReport grad_check(const std::function<Tensor<double>()>& loss_fn,
                           const std::vector<Tensor<double>>& params,
                           double eps = 1e-5);

}  // namespace ssdm
