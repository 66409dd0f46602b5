#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lsaboot {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: shapes, ranges, missing retained data, malformed config.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure family. The CLI maps all of these to exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// -A is not Hurwitz, or a Lyapunov certificate could not be verified.
class StabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Matrix expected to be positive semidefinite has a clearly negative eigenvalue.
class NotPsdError : public NumericalError {
 public:
  NotPsdError(const std::string& what, double eigenvalue)
      : NumericalError(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// An LSA trajectory left the finite region (non-finite or norm above the guard).
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, std::int64_t step, std::int64_t replica = -1)
      : NumericalError(what), step_(step), replica_(replica) {}
  std::int64_t step() const noexcept { return step_; }
  /// -1 for the main trajectory.
  std::int64_t replica() const noexcept { return replica_; }

 private:
  std::int64_t step_;
  std::int64_t replica_;
};

/// MDP does not admit a unique positive stationary law, or the TD system is singular.
class ModelError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lsaboot
