#pragma once

#include <stdexcept>
#include <string>

namespace ssdm {

// Shape or dimension disagreement between operands. Messages name both shapes.
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument values: labels out of range, missing gradients, bad dtypes.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad run configuration: unknown keys, missing inputs for a variant, mismatched
// checkpoint.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File format and filesystem problems.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ssdm
