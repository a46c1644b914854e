#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "ssdm/config.hpp"

namespace ssdm {

// Command implementations behind the `ssdm` CLI, reusable from tests.
// Exit codes: 0 success, 1 verification failure, 2 usage/config error.

int cmd_gen_data(const RunConfig& config, std::ostream& out);

int cmd_train(const RunConfig& config, const std::string& variant,
              std::ostream& out);

int cmd_eval(const RunConfig& config, std::ostream& out);

int cmd_gradcheck(const RunConfig& config, std::ostream& out);

int cmd_oracle(const RunConfig& config, std::ostream& out);

int cmd_bench(const RunConfig& config, std::ostream& out);

int cmd_export_masks(const RunConfig& config, std::ostream& out);

}  // namespace ssdm
