#pragma once

#include <stdexcept>

namespace driftlab {

// Bad user input: dimensions, ranges, malformed specs or files.
class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation left its valid numeric domain: divergence, instability,
// unsatisfiable tolerance.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem or serialization failure.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace driftlab
