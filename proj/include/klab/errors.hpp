#pragma once

#include <stdexcept>
#include <string>

namespace klab {

// Input violates a documented precondition (malformed JSON, mismatched
// dimensions, invalid group table, repeated branch points, ...).
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A configured size or budget cap would be exceeded.
struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numeric routine failed to reach its accuracy contract (quadrature did
// not stabilize under node doubling, tail bound exceeds the budget, ...).
struct precision_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two independent routes that must agree disagreed, or an internal guard
// tripped. Always a bug, never recoverable by the caller.
struct consistency_error : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace klab
