#include "sigma_collapse/errors.h"

namespace sigma {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kQuadratureFailure: return "quadrature-failure";
    case ErrorCode::kDivergentIntegrand: return "divergent-integrand";
    case ErrorCode::kGridTooCoarse: return "grid-too-coarse";
    case ErrorCode::kGridMismatch: return "grid-mismatch";
    case ErrorCode::kCflViolation: return "cfl-violation";
    case ErrorCode::kNanDetected: return "nan-detected";
    case ErrorCode::kNoRootInBracket: return "no-root-in-bracket";
    case ErrorCode::kMaxIters: return "max-iters";
    case ErrorCode::kOrthogonalityViolation: return "orthogonality-violation";
    case ErrorCode::kSmallnessViolation: return "smallness-violation";
    case ErrorCode::kCoefficientsUnavailable: return "coefficients-unavailable";
    case ErrorCode::kEmptySample: return "empty-sample";
    case ErrorCode::kTraceTooShort: return "trace-too-short";
    case ErrorCode::kInsufficientSnapshots: return "insufficient-snapshots";
    case ErrorCode::kSeriesTooShort: return "series-too-short";
    case ErrorCode::kInsufficientDynamicRange: return "insufficient-dynamic-range";
    case ErrorCode::kFitDegenerate: return "fit-degenerate";
    case ErrorCode::kStepUnderflow: return "step-underflow";
    case ErrorCode::kConfig: return "config-error";
    case ErrorCode::kIo: return "io-error";
  }
  return "unknown-error";
}

}  // namespace sigma
