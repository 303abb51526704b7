#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vslab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad dimensions, out-of-range parameters, unknown keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Both means vanish, so R+ = 0 and nothing is learnable.
class DegenerateModelError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// GD produced non-finite iterates or a rising loss.
class StepSizeError : public NumericalError {
 public:
  StepSizeError(const std::string& what, std::int64_t iteration)
      : NumericalError(what + " (iteration " + std::to_string(iteration) +
                       "; reduce the step size)"),
        iteration_(iteration) {}
  std::int64_t iteration() const noexcept { return iteration_; }

 private:
  std::int64_t iteration_;
};

class NonSeparableError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SolverTimeoutError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankDeficiencyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace vslab
