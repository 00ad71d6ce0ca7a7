#pragma once

#include <stdexcept>
#include <string>

namespace homog {

/// Invalid experiment or model configuration. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A point was passed outside the domain of a map.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// An iterative numerical procedure stopped before meeting its tolerance.
/// Maps to CLI exit code 3.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace homog
