#include "sigma_collapse/quadrature.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sigma_collapse/errors.h"

namespace sigma {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;

QuadratureResult raw_interval(const RadialFunction& f, double a, double b,
                              const QuadratureScheme& scheme) {
  double error = 0.0;
  double l1 = 0.0;
  const double value =
      Kronrod::integrate(f, a, b, scheme.max_depth, scheme.rel_tol, &error, &l1);
  return {value, error, l1};
}

void accept_or_throw(const QuadratureResult& r, const QuadratureScheme& scheme,
                     const char* where) {
  const double limit = std::max({scheme.abs_tol, scheme.rel_tol * std::abs(r.value),
                                 scheme.cancellation_tol * r.l1});
  if (!std::isfinite(r.value) || !std::isfinite(r.error)) {
    throw QuadratureFailure(std::string(where) + ": non-finite integrand or result",
                            r.value, r.error);
  }
  if (r.error > limit) {
    std::ostringstream msg;
    msg << where << ": error estimate " << r.error << " exceeds tolerance " << limit;
    throw QuadratureFailure(msg.str(), r.value, r.error);
  }
}

}  // namespace

QuadratureResult integrate_interval(const RadialFunction& f, double a, double b,
                                    const QuadratureScheme& scheme) {
  QuadratureResult total;
  std::vector<double> cuts{a};
  for (double bp : scheme.breakpoints) {
    if (bp > a && bp < b) cuts.push_back(bp);
  }
  std::sort(cuts.begin() + 1, cuts.end());
  cuts.push_back(b);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const auto part = raw_interval(f, cuts[i], cuts[i + 1], scheme);
    total.value += part.value;
    total.error += part.error;
    total.l1 += part.l1;
  }
  accept_or_throw(total, scheme, "integrate_interval");
  return total;
}

QuadratureResult integrate(const RadialFunction& f, const QuadratureScheme& scheme) {
  if (scheme.method == QuadratureMethod::kAdaptiveFinite) {
    return integrate_interval(f, 0.0, scheme.r_max, scheme);
  }
  QuadratureResult total;
  std::vector<double> cuts{0.0};
  for (double bp : scheme.breakpoints) {
    if (bp > 0.0 && bp < scheme.r_split) cuts.push_back(bp);
  }
  std::sort(cuts.begin() + 1, cuts.end());
  cuts.push_back(scheme.r_split);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const auto part = raw_interval(f, cuts[i], cuts[i + 1], scheme);
    total.value += part.value;
    total.error += part.error;
    total.l1 += part.l1;
  }
  // Tail: r = R / t maps [R, inf) onto (0, 1]; algebraic decay r^-p becomes
  // t^(p-2), regular at t = 0 for the integrands used here.
  const double big_r = scheme.r_split;
  const RadialFunction tail = [&f, big_r](double t) {
    const double r = big_r / t;
    return f(r) * big_r / (t * t);
  };
  const auto part = raw_interval(tail, 0.0, 1.0, scheme);
  total.value += part.value;
  total.error += part.error;
  total.l1 += part.l1;
  accept_or_throw(total, scheme, "integrate");
  return total;
}

}  // namespace sigma
