#pragma once

#include <functional>
#include <vector>

namespace sigma {

using RadialFunction = std::function<double(double)>;

enum class QuadratureMethod {
  kAdaptiveFinite,   // adaptive Gauss-Kronrod on [0, R]
  kTailTransformed,  // [0, R_split] adaptive, [R_split, inf) via r = R_split / t
};

struct QuadratureScheme {
  QuadratureMethod method = QuadratureMethod::kTailTransformed;
  double abs_tol = 1e-14;
  double rel_tol = 1e-12;
  double r_split = 1.0;
  double r_max = 1.0;  // upper limit for kAdaptiveFinite
  // Floor relative to int |f|; integrals that cancel to ~0 cannot be
  // resolved below round-off of the absolute integrand.
  double cancellation_tol = 1e-12;
  unsigned max_depth = 15;
  // Extra interior breakpoints in (0, r_split); useful when the integrand is
  // concentrated at a scale far from r_split.
  std::vector<double> breakpoints;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;  // int |f|
};

// Integrates f over [0, inf) (or [0, r_max]) according to the scheme.
// Throws QuadratureFailure when the error estimate exceeds
// max(abs_tol, rel_tol * |value|, cancellation_tol * int |f|).
QuadratureResult integrate(const RadialFunction& f, const QuadratureScheme& scheme);

// Plain adaptive integral over a finite interval [a, b] with the same
// acceptance rule. Exposed for the identity checks.
QuadratureResult integrate_interval(const RadialFunction& f, double a, double b,
                                    const QuadratureScheme& scheme);

}  // namespace sigma
