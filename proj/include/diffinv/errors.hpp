#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace diffinv {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument: out-of-range index, bad parameter, mismatched meshes.
class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& msg) : Error(msg) {}
};

/// A data invariant does not hold (coefficient outside [lambda, Lambda], negative weight, ...).
class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& msg) : Error(msg) {}
};

/// Iterative solver stopped before reaching the requested tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& msg, int iterations, double residual)
      : Error(msg), iterations_(iterations), residual_(residual) {}

  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Mollifier radius not resolvable on the grid.
class ResolutionError : public Error {
 public:
  explicit ResolutionError(const std::string& msg) : Error(msg) {}
};

/// Least-squares fit has no usable data.
class DegenerateFit : public Error {
 public:
  explicit DegenerateFit(const std::string& msg) : Error(msg) {}
};

/// Coefficient recovery could not produce any usable value.
class RecoveryFailure : public Error {
 public:
  explicit RecoveryFailure(const std::string& msg) : Error(msg) {}
};

/// Input data does not have the structure an algorithm needs.
class MalformedInput : public Error {
 public:
  explicit MalformedInput(const std::string& msg) : Error(msg) {}
};

/// The derivative of the 1D solution changes sign more than once.
class AmbiguousPivot : public Error {
 public:
  AmbiguousPivot(const std::string& msg, std::vector<double> crossings)
      : Error(msg), crossings_(std::move(crossings)) {}

  const std::vector<double>& crossings() const { return crossings_; }

 private:
  std::vector<double> crossings_;
};

/// Configuration or input-file problem (maps to CLI exit code 2).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

std::string format_crossings(const std::vector<double>& crossings);

}  // namespace diffinv
