#pragma once

// Closed-form harmonic-map soliton I(r) = 2 atan(r^k) of the k-equivariant
// reduction and the quantities derived from it. Every formula that is
// specific to the soliton family lives here; other modules call these.
//
// Notation: for a profile with scale lambda, F_lambda(r) = F(lambda r).

namespace sigma {

// Topological degree of the equivariant map. Formulas are valid for k >= 2;
// the blowup construction itself assumes k >= 4.
class HomotopyClass {
 public:
  explicit HomotopyClass(int k);

  int value() const noexcept { return k_; }
  bool theorem_regime() const noexcept { return k_ >= 4; }

  friend bool operator==(HomotopyClass, HomotopyClass) = default;

 private:
  int k_;
};

struct SolitonProfile {
  SolitonProfile(HomotopyClass k, double lambda);
  SolitonProfile(int k, double lambda) : SolitonProfile(HomotopyClass(k), lambda) {}

  HomotopyClass k;
  double lambda;
};

struct TrigComposites {
  double sin_I;
  double cos_I;
  double sin_2I;
  double cos_2I;
  double one_plus_cos_I;  // 2/(1+x^2), free of cancellation at large r
};

// Angle in [0, pi].
double eval_I(const SolitonProfile& p, double r);

// J_lambda(r) = (r d_r I)(lambda r) = k sin I_lambda(r).
double eval_J(const SolitonProfile& p, double r);

TrigComposites eval_trig_composites(const SolitonProfile& p, double r);

// K(lambda r) with K(s) = s^2 J(s) / 4, the solution of H_1 K = -(J + s J').
double eval_K(const SolitonProfile& p, double r);

// (s d_s J)(s) at s = lambda r, i.e. k cos(I) J.
double eval_rdrJ(const SolitonProfile& p, double r);

// (s d_s)^2 J at s = lambda r, i.e. k^2 cos^2(I) J - J^3.
double eval_rdr2J(const SolitonProfile& p, double r);

// (s^2 J)(s) at s = lambda r.
double eval_r2J(const SolitonProfile& p, double r);

// Coefficients of the leading radiation correction w0.
struct W0Coefficients {
  int k = 0;
  double a = 0.0;
  double b = 0.25;
  bool valid = false;
};

// w0(r) = (lambda_dot^2 / lambda^4) (a J_lambda(r) + b (r^2 J)_lambda(r)).
// Throws kCoefficientsUnavailable unless coeffs were computed for p.k.
double eval_w0(const SolitonProfile& p, const W0Coefficients& coeffs,
               double lambda_dot, double r);

}  // namespace sigma
