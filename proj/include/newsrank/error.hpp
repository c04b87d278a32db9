#pragma once

#include <stdexcept>
#include <string>

namespace newsrank {

/// Base of every error raised by the library. The CLI maps the concrete
/// subclass onto its exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments (exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Training diverged or produced non-finite values (exit code 3).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Lookup of an unknown session, corpus or scorer.
class NotFoundError : public DataError {
 public:
  using DataError::DataError;
};

/// Request conflicts with current state (out-of-order or duplicate rating,
/// incomplete session).
class ConflictError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace newsrank
