#pragma once

#include <stdexcept>
#include <string>

namespace ndg {

// Two fields (or a field and an operator) were built on different grids.
class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Time step too large for the advective CFL bound.
class CflViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values appeared in the state.
class BlowUp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files, missing checkpoints, bad configuration values.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace ndg
