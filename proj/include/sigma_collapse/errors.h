#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sigma {

enum class ErrorCode {
  kInvalidArgument,
  kQuadratureFailure,
  kDivergentIntegrand,
  kGridTooCoarse,
  kGridMismatch,
  kCflViolation,
  kNanDetected,
  kNoRootInBracket,
  kMaxIters,
  kOrthogonalityViolation,
  kSmallnessViolation,
  kCoefficientsUnavailable,
  kEmptySample,
  kTraceTooShort,
  kInsufficientSnapshots,
  kSeriesTooShort,
  kInsufficientDynamicRange,
  kFitDegenerate,
  kStepUnderflow,
  kConfig,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Domain error raised by every module. The CLI maps these to exit status 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Adaptive quadrature gave up; carries what it had.
class QuadratureFailure : public Error {
 public:
  QuadratureFailure(const std::string& what, double partial_value,
                    double error_estimate)
      : Error(ErrorCode::kQuadratureFailure, what),
        partial_value_(partial_value),
        error_estimate_(error_estimate) {}

  double partial_value() const noexcept { return partial_value_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double partial_value_;
  double error_estimate_;
};

// Validation failures that report the measured offending quantity.
class MeasuredViolation : public Error {
 public:
  MeasuredViolation(ErrorCode code, const std::string& what, double measured)
      : Error(code, what), measured_(measured) {}

  double measured() const noexcept { return measured_; }

 private:
  double measured_;
};

}  // namespace sigma
