// Error types shared by all modules.
#pragma once

#include <stdexcept>
#include <string>

namespace bq {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric capacity problems (list sizes, iteration bounds). The CLI maps
// these to exit code 3.
struct CapacityError : Error {
  using Error::Error;
};

struct IterationLimit : CapacityError {
  using CapacityError::CapacityError;
};
struct CapacityExceeded : CapacityError {
  using CapacityError::CapacityError;
};
struct SeriesDivergence : CapacityError {
  using CapacityError::CapacityError;
};
struct TailTooLarge : CapacityError {
  using CapacityError::CapacityError;
};

struct OverflowError : Error {
  using Error::Error;
};
struct WeightMismatch : Error {
  using Error::Error;
};
struct EmptySpace : Error {
  using Error::Error;
};
struct NotCuspidal : Error {
  using Error::Error;
};
struct NotInLinftyH : Error {
  using Error::Error;
};
struct SpaceMismatch : Error {
  using Error::Error;
};

// Raised by quad::integrate when the integrand throws; carries the node.
struct EvaluationError : Error {
  EvaluationError(std::size_t node, const std::string& what)
      : Error("integrand failed at node " + std::to_string(node) + ": " + what),
        node_index(node) {}
  std::size_t node_index;
};

}  // namespace bq
