#pragma once

#include <stdexcept>
#include <string>

namespace lorenzlab {

struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised for points outside a chart or grid.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Solver failures, blow-ups, and anything that indicates a bug.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lorenzlab
