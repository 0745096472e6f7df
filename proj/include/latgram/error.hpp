#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace latgram {

enum class ErrorCode {
  InvalidArgument,
  Range,
  NumericalDomain,
  AccuracyNotAttained,
  Stiffness,
  SingularGramian,
};

// Base of every exception thrown by the library. The C API maps code() onto
// its status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::InvalidArgument, what) {}
};

// Value outside the representable or admissible range. Some callers attach
// the logarithm of the value that could not be represented.
class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what,
                      std::optional<double> log_value = std::nullopt)
      : Error(ErrorCode::Range, what), log_value_(log_value) {}

  std::optional<double> log_value() const noexcept { return log_value_; }

 private:
  std::optional<double> log_value_;
};

class NumericalDomainError : public Error {
 public:
  explicit NumericalDomainError(const std::string& what)
      : Error(ErrorCode::NumericalDomain, what) {}
};

// Adaptive integration ran out of subdivisions. Carries the best estimate.
class AccuracyNotAttained : public Error {
 public:
  AccuracyNotAttained(const std::string& what, double best_value,
                      double error_estimate)
      : Error(ErrorCode::AccuracyNotAttained, what),
        best_value_(best_value),
        error_estimate_(error_estimate) {}

  double best_value() const noexcept { return best_value_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_value_;
  double error_estimate_;
};

class StiffnessError : public Error {
 public:
  explicit StiffnessError(const std::string& what)
      : Error(ErrorCode::Stiffness, what) {}
};

// The output Gramian is numerically singular: the targets are not output
// controllable from the drivers at this horizon.
class SingularGramian : public Error {
 public:
  explicit SingularGramian(const std::string& what)
      : Error(ErrorCode::SingularGramian, what) {}
};

}  // namespace latgram
