#pragma once

#include <map>
#include <optional>
#include <string>

#include "sigma_collapse/field.h"
#include "sigma_collapse/profiles.h"
#include "sigma_collapse/quadrature.h"

namespace sigma {

enum class Weight { kRdr, kR3dr };

// <f, g> = int_0^inf f g r dr (or r^3 dr).
QuadratureResult inner_product(const RadialFunction& f, const RadialFunction& g,
                               Weight weight = Weight::kRdr,
                               const QuadratureScheme& scheme = {});

// Constants of the modulation analysis, all at lambda = 1.
struct PaperConstants {
  int k = 0;
  double C0 = 0.0;    // <J, J>
  double JJr2 = 0.0;  // <J, r^2 J>
  double a = 0.0;     // -(1/4) JJr2 / C0
  double b = 0.25;
  double Cstar = 0.0;  // T1 + T2 + T3
  double T1 = 0.0;
  double T2 = 0.0;
  double T3 = 0.0;
  // The same three terms after integrating by parts into J^2, J^4 moments.
  double T1_ibp = 0.0;
  double T2_ibp = 0.0;
  double T3_ibp = 0.0;
  double J4r = 0.0;   // int J^4 r dr
  double J4r3 = 0.0;  // int J^4 r^3 dr
  double E_soliton = 0.0;  // 4 pi k
  // |C_k| = (1/2) int |r d_r I|^2 dx = pi C0; only the magnitude is kept,
  // the sign convention is left to the caller.
  double heuristic_constant_abs = 0.0;
  std::map<std::string, double> err_estimates;

  W0Coefficients w0_coefficients() const { return {k, a, b, true}; }
};

// Requires k >= 3 (<J, r^2 J> diverges for k = 2); propagates QuadratureFailure.
PaperConstants compute_constants(int k, const QuadratureScheme& scheme = {});

// Process-wide memo of compute_constants with the default scheme.
const PaperConstants& cached_constants(int k);

// pi int [(d_t phi)^2 + (d_r phi)^2 + k^2 sin^2(phi) / r^2] r dr on the grid.
// The gradient term uses face differences, matching the discrete Hamiltonian
// the evolution conserves. Throws kGridTooCoarse when the energy density is
// under-resolved at its concentration scale.
double energy(const FieldState& state, int k);

// pi int [(d_t phi)^2 + (d_r phi - (k/r) sin phi)^2] r dr.
double bogomolny_defect(const FieldState& state, int k);

// The same sums without the resolution check, for monitoring inside a run.
double discrete_energy(const FieldState& state, int k);
double discrete_defect(const FieldState& state, int k);

// Boundary term 2 pi k (1 - cos phi(R_max)) of the completed square; equals
// 4 pi k in the degree-k sector and 0 in the trivial one.
double topological_term(const FieldState& state, int k);

// E0 = (1/2) int [(d_t phi)^2 + (d_r u)^2 + k^2 u^2 / r^2] r dr on the grid.
double orbital_energy(const RadialGrid& grid, std::span<const double> u,
                      std::span<const double> phi_t, int k);

// A radial function with its first two derivatives. Empty derivatives are
// approximated by central differences.
struct SmoothRadial {
  RadialFunction f;
  RadialFunction d1;
  RadialFunction d2;

  static SmoothRadial zero();
  double value(double r) const { return f ? f(r) : 0.0; }
  double deriv(double r) const;
  double deriv2(double r) const;
};

// exp(-(ln(r/center))^2 / (2 width^2)) scaled by amplitude; vanishes to all
// orders at 0 and infinity.
SmoothRadial log_bump(double amplitude, double center, double width);
SmoothRadial scaled(const SmoothRadial& f, double factor);
// f - (<f, J>/<J, J>) J at lambda = 1.
SmoothRadial project_out_J(const SmoothRadial& f, int k);

// Squared weighted H^{2,1} norm of (u0, g0). Throws kDivergentIntegrand when
// u0' / r or g0 / r is not square integrable at the origin.
double h21_norm(const SmoothRadial& u0, const SmoothRadial& g0,
                const QuadratureScheme& scheme = {});

struct InitialDataOptions {
  double c0 = 1.0;
  double ortho_tol = 1e-8;  // relative: |<u0,J>| <= tol ||u0|| ||J||
};

// phi(0) = I + u0, d_t phi(0) = (eps/pi) ||J||^-2 J + g0 on the grid.
FieldState make_initial_data(const GridPtr& grid, int k, double eps, const SmoothRadial& u0,
                             const SmoothRadial& g0, const InitialDataOptions& opts = {});

}  // namespace sigma
