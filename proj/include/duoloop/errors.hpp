#pragma once

#include <stdexcept>
#include <string>

namespace duoloop {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates a precondition (non-finite value,
/// out-of-range parameter, malformed grid, ...).
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

/// A field was requested closer to a current-carrying segment than the
/// geometric tolerance allows.
class SingularPointError : public Error {
 public:
  using Error::Error;
};

/// The cancellation target cannot be solved (e.g. the outer loop produces
/// no field component to cancel against at the target).
class UnsolvableTargetError : public Error {
 public:
  using Error::Error;
};

/// A calibration target is outside the physically reachable range.
class InfeasibleTargetError : public Error {
 public:
  using Error::Error;
};

/// Input data does not admit the requested fit (too few samples,
/// non-positive values on a log axis, degenerate window, ...).
class FitDomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative fit failed to converge; carries the best residual seen.
class FitFailureError : public Error {
 public:
  FitFailureError(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_ = 0.0;
};

/// An operation was invoked in a regime its model does not cover.
class ContractViolationError : public Error {
 public:
  using Error::Error;
};

/// Configuration file problems: parse errors, schema violations, unknown
/// scenario names.  Mapped to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Reference record does not match the result being compared.
class ComparisonError : public Error {
 public:
  using Error::Error;
};

}  // namespace duoloop
