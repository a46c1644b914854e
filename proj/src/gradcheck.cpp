#include "ssdm/gradcheck.hpp"

#include <cmath>

namespace ssdm {

GradCheckReport grad_check(const std::function<Tensor<double>()>& loss_fn,
                           const std::vector<Tensor<double>>& params, double eps) {
  GradCheckReport report;

  for (const auto& p : params) p.zero_grad();
  Tensor<double> loss = loss_fn();
  if (!std::isfinite(loss.item())) {
    report.finite = false;
    return report;
  }
  loss.backward();

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) {
    auto g = p.grad();
    analytic.emplace_back(g.begin(), g.end());
  }

  NoGradGuard no_grad;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto vals = const_cast<Tensor<double>&>(params[pi]).mutable_values();
    for (size_t j = 0; j < vals.size(); ++j) {
      const double saved = vals[j];
      vals[j] = saved + eps;
      const double f_plus = loss_fn().item();
      vals[j] = saved - eps;
      const double f_minus = loss_fn().item();
      vals[j] = saved;
      if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
        report.finite = false;
        return report;
      }
      const double numeric = (f_plus - f_minus) / (2.0 * eps);
      const double a = analytic[pi][j];
      const double abs_err = std::abs(a - numeric);
      const double rel_err =
          abs_err / std::max({1.0, std::abs(a), std::abs(numeric)});
      ++report.coords_checked;
      if (abs_err > report.max_abs_err) report.max_abs_err = abs_err;
      if (rel_err > report.max_rel_err) {
        report.max_rel_err = rel_err;
        report.worst_param = static_cast<int64_t>(pi);
        report.worst_index = static_cast<int64_t>(j);
      }
    }
  }
  return report;
}

}  // namespace ssdm
