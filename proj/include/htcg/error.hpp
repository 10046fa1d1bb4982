#pragma once

#include <stdexcept>
#include <string>

namespace htcg {

/// Base of all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input outside an operation's domain (non-positive density, bad sizes, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// The discretization cannot represent the requested quantity.
class ResolutionError : public Error {
public:
  using Error::Error;
};

/// An iterative method stopped without meeting its tolerance.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double last_residual, int iterations)
      : Error(what), last_residual_(last_residual), iterations_(iterations) {}
  double last_residual() const { return last_residual_; }
  int iterations() const { return iterations_; }

private:
  double last_residual_;
  int iterations_;
};

/// Rejected experiment configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace htcg
