#pragma once

#include <stdexcept>
#include <string>

namespace ivmkit {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched vector/matrix sizes; the message names both lengths.
class DimensionError : public Error {
 public:
  using Error::Error;
  DimensionError(const std::string& what, long expected, long got)
      : Error(what + ": expected " + std::to_string(expected) + ", got " +
              std::to_string(got)) {}
};

/// Non-finite values, out-of-range parameters, degenerate label sets.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// A solver failed to produce a usable result (singular system, etc.).
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed input files or schema violations.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A cross-validation fold could not be stratified.
class StratificationError : public Error {
 public:
  using Error::Error;
};

/// Bad experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ivmkit
