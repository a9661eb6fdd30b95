#pragma once

#include <stdexcept>
#include <string>

namespace rydflux {

// Invalid input: bad geometry, bad parameters, malformed config.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: vanishing hopping, gap closure, non-convergence.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested problem does not fit the configured memory budget.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rydflux
