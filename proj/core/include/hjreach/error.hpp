#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hjreach {

// Caller passed arguments that violate an operation's preconditions
// (dimension mismatch, out-of-range time, malformed input).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configuration is incomplete or inconsistent. `field()` names the
// offending key so front ends can report it.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Non-finite values appeared while integrating a value function.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::size_t step, const std::string& message)
      : std::runtime_error(message + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// An internal invariant of the solver was violated (e.g. a time step that
// breaks the CFL bound). Indicates a bug in the driver, not bad input.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace hjreach
