#pragma once

#include <stdexcept>
#include <string>

namespace cascade {

/// Invalid input: parameter outside its domain, malformed sweep, bad flag.
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Closed forms are only available for a real initial coherence (theta = 0).
class UnsupportedPhaseError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// No steady state: at least one decay rate lambda is not positive.
class ThresholdError : public std::runtime_error {
public:
  ThresholdError(const std::string& what, double lambda_minus, double lambda_plus)
      : std::runtime_error(what), lambda_minus_(lambda_minus), lambda_plus_(lambda_plus) {}

  double lambda_minus() const noexcept { return lambda_minus_; }
  double lambda_plus() const noexcept { return lambda_plus_; }

private:
  double lambda_minus_;
  double lambda_plus_;
};

/// Explicit integrator step larger than its stability bound.
class StepSizeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Fock-space integration did not reach a converged, untruncated steady state.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace cascade
