#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sigma_collapse/field.h"
#include "sigma_collapse/profiles.h"

namespace sigma {

struct ExtractOptions {
  // Stop when |g(lambda)| <= ortho_tol * <J_lambda, J_lambda>.
  double ortho_tol = 1e-12;
  int max_iters = 60;
};

struct LambdaFit {
  double lambda = 0.0;
  double residual = 0.0;  // g(lambda) = <phi - I_lambda, J_lambda>
  double relative_residual = 0.0;  // |g| / <J_lambda, J_lambda>
  int iters = 0;
};

// g(lambda) = <phi - I_lambda, J_lambda> in the grid inner product.
double orthogonality_defect(const FieldState& state, double lambda);

// Root of g nearest to lambda_guess within [lambda_guess/4, 4 lambda_guess]:
// a scan on a geometric ladder finds sign changes, then safeguarded Newton
// (bisection fallback) refines the chosen bracket. Errors: kNoRootInBracket,
// kMaxIters.
LambdaFit extract_lambda(const FieldState& state, double lambda_guess,
                         const ExtractOptions& opts = {});

struct Decomposition {
  std::vector<double> u;
  std::vector<double> w0;
  std::vector<double> w;
  double w0_overlap = 0.0;  // <w0, J_lambda>
  double w_overlap = 0.0;   // <w, J_lambda>
};

Decomposition decompose(const FieldState& state, double lambda, double lambda_dot,
                        const W0Coefficients& coeffs);

// 2 lambda^2 <u, (r d_r J)_lambda>, the lambda_dot-cancelled form.
double eps1(const FieldState& state, double lambda);

// Modified nonlinearity N(u) - k^2 sin(2I) u^2 / r^2 (series for small u).
double n_tilde(int k, double sin_2I, double cos_2I, double u, double r);

struct CalETerms {
  double w_Jdot = 0.0;      // 2 <w, J_dot> lambda_dot
  double w_Jddot = 0.0;     // <w, J_ddot> lambda
  double w0_accel = 0.0;    // <w0, (lambda_ddot - 2 lambda_dot^2/lambda) (r d_r J)_lambda>
  double quadratic = 0.0;   // -k^2 <w (2 w0 + w) / r^2, sin(2I) J> lambda
  double cubic = 0.0;       // -<N~(u), J> lambda
  double total() const { return w_Jdot + w_Jddot + w0_accel + quadratic + cubic; }
};

CalETerms calE_terms(const FieldState& state, double lambda, double lambda_dot,
                     double lambda_ddot, const W0Coefficients& coeffs);
double calE(const FieldState& state, double lambda, double lambda_dot, double lambda_ddot,
            const W0Coefficients& coeffs);

struct ModulationRow {
  double t = 0.0;
  double lambda = 0.0;
  double lambda_dot = 0.0;
  double lambda_ddot = 0.0;
  double E0 = 0.0;
  double eps1 = 0.0;
  double calE = 0.0;
  double ortho_residual = 0.0;  // |<u, J_lambda>| / <J_lambda, J_lambda>
  int newton_iters = 0;
  double w0_overlap = 0.0;
  // Residual of lambda_dot (2<I,J> + <phi(r/lambda), r d_r J>) + <phi_t, J_lambda> lambda^3.
  double ode_residual = 0.0;
  std::string status = "ok";
};

struct ModulationTrace {
  int k = 0;
  std::vector<ModulationRow> rows;
};

struct ModulationOptions {
  ExtractOptions extract;
  double lambda_guess = 1.0;
};

// Warm-started extraction over snapshots, then lambda_dot and lambda_ddot by
// five-point differences (one-sided near the ends) and the diagnostics.
// Rows whose extraction fails carry the error code in `status` and NaNs.
// Throws kTraceTooShort with fewer than three snapshots.
ModulationTrace modulate_run(const std::vector<FieldState>& snapshots,
                             const ModulationOptions& opts = {});

// Fourth-order (where possible) derivative of samples y(t) on a possibly
// nonuniform time grid.
std::vector<double> time_derivative(const std::vector<double>& t, const std::vector<double>& y,
                                    int order);

struct MorawetzConfig {
  double delta = 0.1;
  double t0 = 0.0;
  double t1 = 0.0;
};

struct MorawetzResult {
  double value = 0.0;
  double fixed_time_sup = 0.0;
  double spacetime = 0.0;
  std::size_t snapshots = 0;
};

// E_delta[A_lambda w](t0, t1) from snapshots aligned with trace rows.
// L psi = d_t psi + d_r psi uses three-point differences in time. Throws
// kInsufficientSnapshots with fewer than three snapshots in the window.
MorawetzResult morawetz_energy(const std::vector<FieldState>& snapshots,
                               const ModulationTrace& trace, const MorawetzConfig& cfg,
                               const W0Coefficients& coeffs);

}  // namespace sigma
