#pragma once

#include <stdexcept>

namespace locsim {

// Bad arguments to a library operation (out-of-range ids, empty specs, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configuration file or derived configuration violates an invariant.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The LP solver or a calibration routine failed to produce an answer.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Broken internal invariant: scheduler/state mismatch, nonmonotone clock.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace locsim
