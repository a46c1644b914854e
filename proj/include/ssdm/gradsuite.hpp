#pragma once

#include <string>
#include <vector>

#include "ssdm/gradcheck.hpp"

namespace ssdm {

struct GradCheckCase {
  std::string name;
  double max_rel_err = 0.0;
  int64_t coords = 0;
  int instances = 0;
  double tol = 1e-4;
  bool pass = false;
};

// Central-difference verification of every differentiable operation and of
// the full modulation blocks, each over `instances` seeded random instances
// in double precision. Backs `ssdm gradcheck` and the acceptance suite.
std::vector<GradCheckCase> run_gradcheck_suite(uint64_t seed, int instances);

}  // namespace ssdm
