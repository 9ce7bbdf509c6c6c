#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qps {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Intermediate magnitude overflowed, or a result was not finite.
class RangeError : public Error {
public:
  using Error::Error;
};

/// Evaluation requested off the principal branch (e.g. K_p with Re z <= 0).
class BranchError : public Error {
public:
  using Error::Error;
};

/// Query outside the sampled range of tabulated data.
class ExtrapolationError : public Error {
public:
  using Error::Error;
};

/// Malformed input file or configuration document.
class ParseError : public Error {
public:
  using Error::Error;
};

/// Characteristic equation has no admissible root (cutoff, empty scan).
class NoRootError : public Error {
public:
  using Error::Error;
};

/// Iterative method hit its iteration cap.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

/// Input-state optimisation did not meet its tolerance. Carries the best
/// iterate so callers can still inspect it.
class OptimizationError : public Error {
public:
  OptimizationError(const std::string& what, std::vector<double> best_x, double best_fisher)
      : Error(what), best_x_(std::move(best_x)), best_fisher_(best_fisher) {}

  const std::vector<double>& best_x() const noexcept { return best_x_; }
  double best_fisher() const noexcept { return best_fisher_; }

private:
  std::vector<double> best_x_;
  double best_fisher_;
};

}  // namespace qps
