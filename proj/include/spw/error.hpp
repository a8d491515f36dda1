#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spw {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside its valid domain (non-positive sigma, bad sizes,
/// mismatched dimensions, empty samples, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Non-finite input or a numerical routine that failed to make progress.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its iteration cap. Carries the residual norm of
/// every requested triplet at the time of failure.
class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, std::vector<double> residuals)
      : NumericError(what), residuals_(std::move(residuals)) {}

  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// Derivative of a singular value requested where it is not simple.
class DegenerateDerivativeError : public NumericError {
 public:
  DegenerateDerivativeError(const std::string& what, std::size_t index)
      : NumericError(what), index_(index) {}

  /// Zero-based index of the first clustered singular value.
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace spw
