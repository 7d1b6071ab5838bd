#pragma once

#include <stdexcept>
#include <string>

namespace ymlab {

/// Invalid parameters or data that violate an operation's preconditions.
/// Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure broke down (step-size underflow, divergence,
/// non-convergence). Maps to CLI exit code 3.
class BreakdownError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A result could not be certified (e.g. contour refinement exhausted).
/// Maps to CLI exit code 4.
class InconclusiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ymlab
