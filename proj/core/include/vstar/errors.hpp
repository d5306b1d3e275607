/**
 * @file errors.hpp
 * @brief Exception hierarchy shared by every vstar module.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace vstar {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (e.g. negative density).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid model or algorithm parameter (e.g. theta outside its admissible interval).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to reach its tolerance.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  explicit NumericalError(const std::string& what) : Error(what) {}

  [[nodiscard]] double residual() const noexcept { return residual_; }

 private:
  double residual_ = 0.0;
};

/// The enthalpy never reached zero: the configuration is not gravitationally bound.
class UnboundProfile : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BracketError : public Error {
 public:
  using Error::Error;
};

class ExceedsCriticalMass : public Error {
 public:
  using Error::Error;
};

/// Initial density does not satisfy the admissibility condition (e.g. wrong total mass).
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// A simulation state violates r(0)=0, v(0)=0 or r_x>0.
class InvalidState : public Error {
 public:
  using Error::Error;
};

/// A single implicit step could not be completed; callers may retry with a smaller dt.
class StepRejected : public Error {
 public:
  using Error::Error;
};

class StepFailure : public Error {
 public:
  StepFailure(const std::string& what, double time) : Error(what), time_(time) {}
  [[nodiscard]] double time() const noexcept { return time_; }

 private:
  double time_;
};

class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace vstar
