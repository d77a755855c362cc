#include "sigma_collapse/profiles.h"

#include <cmath>
#include <numbers>
#include <string>

#include "sigma_collapse/errors.h"

namespace sigma {

namespace {

// Beyond this x = (lambda r)^k the rational forms are replaced by their
// leading asymptotics.
constexpr double kTailThreshold = 1e15;

struct Power {
  double x;     // (lambda r)^k
  bool tail;    // x > kTailThreshold
};

Power scaled_power(const SolitonProfile& p, double r) {
  const double s = p.lambda * r;
  if (s <= 0.0) return {0.0, false};
  const double x = std::exp(p.k.value() * std::log(s));
  return {x, x > kTailThreshold};
}

}  // namespace

HomotopyClass::HomotopyClass(int k) : k_(k) {
  if (k < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "homotopy class k must be >= 2, got " + std::to_string(k));
  }
}

SolitonProfile::SolitonProfile(HomotopyClass k_in, double lambda_in)
    : k(k_in), lambda(lambda_in) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidArgument, "soliton scale must be positive and finite");
  }
}

double eval_I(const SolitonProfile& p, double r) {
  const auto [x, tail] = scaled_power(p, r);
  if (tail) return std::numbers::pi - 2.0 / x;
  return 2.0 * std::atan(x);
}

double eval_J(const SolitonProfile& p, double r) {
  const auto [x, tail] = scaled_power(p, r);
  const double k = p.k.value();
  if (tail) return 2.0 * k / x;
  return 2.0 * k * x / (1.0 + x * x);
}

TrigComposites eval_trig_composites(const SolitonProfile& p, double r) {
  const auto [x, tail] = scaled_power(p, r);
  TrigComposites c{};
  if (tail) {
    const double inv = 1.0 / x;
    c.sin_I = 2.0 * inv;
    c.cos_I = -1.0 + 2.0 * inv * inv;
    c.one_plus_cos_I = 2.0 * inv * inv;
    c.sin_2I = -4.0 * inv;
    c.cos_2I = 1.0 - 8.0 * inv * inv;
    return c;
  }
  const double t = 1.0 / (1.0 + x * x);
  c.sin_I = 2.0 * x * t;
  c.cos_I = (1.0 - x * x) * t;
  c.one_plus_cos_I = 2.0 * t;
  c.sin_2I = 2.0 * c.sin_I * c.cos_I;
  c.cos_2I = 1.0 - 2.0 * c.sin_I * c.sin_I;
  return c;
}

double eval_K(const SolitonProfile& p, double r) {
  const double s = p.lambda * r;
  return 0.25 * s * s * eval_J(p, r);
}

double eval_rdrJ(const SolitonProfile& p, double r) {
  const auto c = eval_trig_composites(p, r);
  return p.k.value() * c.cos_I * eval_J(p, r);
}

double eval_rdr2J(const SolitonProfile& p, double r) {
  const auto c = eval_trig_composites(p, r);
  const double k = p.k.value();
  const double j = eval_J(p, r);
  return k * k * c.cos_I * c.cos_I * j - j * j * j;
}

double eval_r2J(const SolitonProfile& p, double r) {
  const double s = p.lambda * r;
  return s * s * eval_J(p, r);
}

double eval_w0(const SolitonProfile& p, const W0Coefficients& coeffs,
               double lambda_dot, double r) {
  if (!coeffs.valid || coeffs.k != p.k.value()) {
    throw Error(ErrorCode::kCoefficientsUnavailable,
                "w0 coefficients not computed for k=" + std::to_string(p.k.value()));
  }
  if (lambda_dot == 0.0) return 0.0;
  const double l2 = p.lambda * p.lambda;
  const double scale = lambda_dot * lambda_dot / (l2 * l2);
  return scale * (coeffs.a * eval_J(p, r) + coeffs.b * eval_r2J(p, r));
}

}  // namespace sigma
