#pragma once

#include <stdexcept>
#include <string>

namespace mgccf {

// Malformed input file (message carries the line number).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dataset-level violations: empty dataset, impossible split, sampler dead ends.
struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape mismatch between operands; message names both shapes.
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values where finite ones are required; message names the tensor.
struct NumericsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inconsistent or incomplete configuration detected before compute starts.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mgccf
