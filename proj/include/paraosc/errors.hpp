#pragma once

#include <stdexcept>

namespace paraosc {

// CLI exit-code mapping: ConfigError -> 1, SolverError -> 2, validation failure -> 3.

/// Malformed scenario/preset input: bad field, bad value, bad dimensions.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical abort: residual monitor tripped, non-finite state, broken structure.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace paraosc
