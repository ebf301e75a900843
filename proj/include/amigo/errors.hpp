#pragma once

#include <stdexcept>
#include <string>

namespace amigo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class EnvError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Raised when a non-finite value shows up in a tensor or a loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Raised when a training-time bookkeeping invariant is violated.
class InvariantError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace amigo
