#pragma once

#include <stdexcept>
#include <string>

namespace dchub {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (configuration, CSV, scenario files).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Regression / ratio fitting failed (underdetermined or rank-deficient data).
class FitError : public Error {
 public:
  using Error::Error;
};

/// Model assembly failed (dimension mismatch, duplicate names, bad parameters).
class BuildError : public Error {
 public:
  using Error::Error;
};

/// Interchange-file serialization failed.
class SerializationError : public Error {
 public:
  using Error::Error;
};

/// The configured solver backend is unavailable.
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

/// The solver backend ran but its output could not be interpreted.
class BackendError : public Error {
 public:
  BackendError(const std::string& what, std::string raw_output)
      : Error(what), raw_output_(std::move(raw_output)) {}
  const std::string& raw_output() const noexcept { return raw_output_; }

 private:
  std::string raw_output_;
};

/// A redistribution or planning problem has no feasible solution.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, std::string hint = {})
      : Error(what), hint_(std::move(hint)) {}
  /// Which relaxation (if any) restores feasibility.
  const std::string& hint() const noexcept { return hint_; }

 private:
  std::string hint_;
};

/// The solver failed to deliver a usable incumbent (time limit without
/// solution, unbounded, numerical trouble).
class SolverFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace dchub
