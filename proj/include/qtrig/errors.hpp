#pragma once

#include <stdexcept>
#include <string>

namespace qtrig {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Iterative method failed to converge within its cap.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Quantizer input outside [-E, E].
class SaturationError : public Error {
 public:
  using Error::Error;
};

/// Design constants violate a feasibility condition (no admissible omega or R).
class InfeasibleDesign : public Error {
 public:
  using Error::Error;
};

/// Event ordering broken (a recomputation outside its admissible window).
class LedgerError : public Error {
 public:
  using Error::Error;
};

/// Post-run or in-run invariant failure of the closed loop.
class AssertionFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qtrig
