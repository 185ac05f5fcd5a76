#pragma once

#include <stdexcept>
#include <string>

namespace evit {

// Base of every error raised by the library. The CLI maps each subclass to
// an exit code (see exit_code_for in pipeline.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input values: dimension mismatches, out-of-range parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Unreadable or inconsistent configuration and missing stage artifacts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Inputs are well formed but an operation's precondition does not hold
// (e.g. fewer than two source domains).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Solver failures: indefinite matrices, failed factorisations.
class NumericalError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace detail
}  // namespace evit
