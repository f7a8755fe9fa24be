#pragma once

#include <stdexcept>
#include <string>

namespace got {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad dimensions, sign or stochasticity violations, bad config fields.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: non-convergence, non-finite values, oversized enumeration.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// The induced chain has more than one closed recurrent class.
class MultichainError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace got
