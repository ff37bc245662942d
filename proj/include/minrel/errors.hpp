#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace minrel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (ln_q of x <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inputs that violate a documented invariant: mismatched spaces, bad weights,
/// unnormalized densities, degenerate features.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Moment targets that no admissible density can reproduce.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver stopped without meeting its tolerance. Carries the last
/// iterate so callers can inspect how far it got.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> last_beta,
                   std::vector<double> last_residuals, std::vector<double> history = {})
      : Error(what),
        last_beta_(std::move(last_beta)),
        last_residuals_(std::move(last_residuals)),
        history_(std::move(history)) {}

  const std::vector<double>& last_beta() const noexcept { return last_beta_; }
  const std::vector<double>& last_residuals() const noexcept { return last_residuals_; }
  /// Outer fixed-point iterates (normalized regime only).
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> last_beta_;
  std::vector<double> last_residuals_;
  std::vector<double> history_;
};

/// A verification was asked for on inputs that do not meet its preconditions.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace minrel
