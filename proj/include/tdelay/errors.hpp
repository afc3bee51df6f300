#pragma once

#include <stdexcept>
#include <string>

namespace tdelay {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input configuration or potential description.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (E <= 0, x off a table, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Potential does not decay within the search cap.
class NonShortRangeError : public Error {
 public:
  using Error::Error;
};

/// Scattering solution violates flux/reciprocity beyond the allowed residual.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Energy derivative could not be estimated reliably.
class DerivativeError : public Error {
 public:
  using Error::Error;
};

/// S-matrix could not be mapped onto the (alpha, beta, gamma) parameterization.
class ParameterizationError : public Error {
 public:
  using Error::Error;
};

/// Two algebraic routes that must agree do not (basis, branch or sign conventions).
class ConventionError : public Error {
 public:
  using Error::Error;
};

}  // namespace tdelay
