#pragma once

#include <stdexcept>
#include <string>

namespace manin {

// Invalid model, place, grid or other user-supplied configuration.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Operation not implemented for the requested input (e.g. non-catalog model).
struct Unsupported : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Node/depth cap hit; never silently truncated.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Quadrature or extrapolation could not reach its target.
struct NumericFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PoleError : std::domain_error {
  using std::domain_error::domain_error;
};

}  // namespace manin
