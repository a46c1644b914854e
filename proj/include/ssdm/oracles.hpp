#pragma once

#include <string>
#include <vector>

#include "ssdm/labelmap.hpp"
#include "ssdm/tensor.hpp"

namespace ssdm::oracles {

// Direct-translation reference of the biased decomposed attention: explicit
// per-pixel loops, row pass then column pass, sharing no code with the
// production kernels. Inputs as in row_attention/col_attention.
Tensor<double> naive_biased_axial_attention(const Tensor<double>& q,
                                            const Tensor<double>& k,
                                            const Tensor<double>& v,
                                            const Tensor<double>& gx,
                                            const Tensor<double>& gy, int64_t heads);

// Independent 4-connected component counter (two-pass union-find, unlike the
// flood fill in metrics).
std::vector<int64_t> count_components_union_find(const LabelMap& map,
                                                 int64_t num_classes);

struct OracleCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

// The verification battery behind `ssdm oracle`: decomposed-vs-naive
// attention, slice-vs-materialized affinity, identity at initialization
// (with negative control), and bias shift invariance.
std::vector<OracleCheck> run_oracle_suite(uint64_t seed);

}  // namespace ssdm::oracles
