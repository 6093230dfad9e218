#pragma once

#include <stdexcept>
#include <string>

namespace gprda {

// Base of every error raised by the library. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user configuration (ranges, radar settings, unknown enum names).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// FDTD time step violates the Courant limit.
class StabilityError : public Error {
 public:
  using Error::Error;
};

// Tensor / layer shapes do not conform.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Input that makes an operation undefined (all-zero envelope, constant series, ...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Row selection emptied a dataset.
class PruningError : public Error {
 public:
  using Error::Error;
};

// An upstream artifact required by a command is missing.
class DependencyError : public Error {
 public:
  using Error::Error;
};

// Filesystem read/write failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gprda
