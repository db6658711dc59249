#pragma once

#include <stdexcept>
#include <string>

namespace tpdg {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Dimension or index mismatch between operands.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// A matrix or diagonal block is numerically singular.
class SingularError : public Error {
public:
  using Error::Error;
};

/// Non-physical PDE state encountered during flux evaluation (e.g. rho <= 0).
class StateError : public Error {
public:
  using Error::Error;
};

/// Iterative method exhausted its budget before reaching tolerance.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

/// Malformed configuration or usage contract violation.
class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace tpdg
