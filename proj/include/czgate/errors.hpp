#pragma once

#include <stdexcept>
#include <string>

namespace czgate {

/// Input rejected before any computation (bad parameters, malformed config).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not deliver its postcondition.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive integration broke down; carries the time at which it happened.
class StepUnderflowError : public NumericalError {
 public:
  StepUnderflowError(const std::string& what, double t)
      : NumericalError(what), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Operator failed the Hermiticity check.
class HermiticityError : public ValidationError {
 public:
  HermiticityError(const std::string& what, double asymmetry)
      : ValidationError(what), asymmetry_(asymmetry) {}
  double max_asymmetry() const noexcept { return asymmetry_; }

 private:
  double asymmetry_;
};

}  // namespace czgate
