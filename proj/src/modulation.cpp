#include "sigma_collapse/modulation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sigma_collapse/errors.h"
#include "sigma_collapse/functionals.h"
#include "sigma_collapse/operators.h"

namespace sigma {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Probe {
  double g = 0.0;
  double dg = 0.0;
  double jj = 0.0;
};

Probe probe(const FieldState& s, double lambda) {
  const SolitonProfile p(s.k, lambda);
  const auto& g = *s.grid;
  const auto w = g.weights();
  Probe out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.r(i);
    const double J = eval_J(p, r);
    const double u = s.phi[i] - eval_I(p, r);
    out.g += w[i] * u * J;
    out.jj += w[i] * J * J;
    out.dg += w[i] * (u * eval_rdrJ(p, r) - J * J);
  }
  out.dg /= lambda;
  return out;
}

std::vector<double> sample(const RadialGrid& g, const SolitonProfile& p,
                           double (*f)(const SolitonProfile&, double)) {
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = f(p, g.r(i));
  return out;
}

}  // namespace

double orthogonality_defect(const FieldState& state, double lambda) {
  check_consistent(state);
  return probe(state, lambda).g;
}

LambdaFit extract_lambda(const FieldState& state, double lambda_guess, const ExtractOptions& opts) {
  check_consistent(state);
  if (!(lambda_guess > 0.0) || !std::isfinite(lambda_guess)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda guess must be positive");
  }
  // Scan lambda_guess * 4^(j/8), j = -16..16, for sign changes of g.
  constexpr int kHalf = 16;
  std::vector<double> lam(2 * kHalf + 1);
  std::vector<double> gv(lam.size());
  for (int j = -kHalf; j <= kHalf; ++j) {
    lam[j + kHalf] = lambda_guess * std::pow(4.0, j / 8.0);
    gv[j + kHalf] = probe(state, lam[j + kHalf]).g;
  }
  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < lam.size(); ++j) {
    if (gv[j] == 0.0 || (gv[j] < 0.0) != (gv[j + 1] < 0.0)) {
      const double mid = std::sqrt(lam[j] * lam[j + 1]);
      const double dist = std::abs(std::log(mid / lambda_guess));
      if (dist < best_dist) {
        best_dist = dist;
        best = static_cast<int>(j);
      }
    }
  }
  if (best < 0) {
    std::ostringstream msg;
    msg << "g(lambda) has no sign change in [" << lam.front() << ", " << lam.back() << "]";
    throw Error(ErrorCode::kNoRootInBracket, msg.str());
  }
  double lo = lam[best];
  double hi = lam[best + 1];
  double g_lo = gv[best];
  if (g_lo == 0.0) return {lo, 0.0, 0.0, 0};
  // Start from whichever end of the bracket is closer to the guess.
  double x = std::abs(std::log(lo / lambda_guess)) < std::abs(std::log(hi / lambda_guess)) ? lo : hi;
  if (lambda_guess > lo && lambda_guess < hi) x = lambda_guess;
  LambdaFit fit;
  for (int it = 1; it <= opts.max_iters; ++it) {
    const auto pr = probe(state, x);
    fit.lambda = x;
    fit.residual = pr.g;
    fit.relative_residual = std::abs(pr.g) / pr.jj;
    fit.iters = it;
    if (fit.relative_residual <= opts.ortho_tol) {
      // one more Newton correction; keep it only if it does not hurt
      if (pr.dg != 0.0) {
        const double xn = x - pr.g / pr.dg;
        if (xn > lo && xn < hi) {
          const auto pn = probe(state, xn);
          if (std::abs(pn.g) <= std::abs(pr.g)) {
            fit.lambda = xn;
            fit.residual = pn.g;
            fit.relative_residual = std::abs(pn.g) / pn.jj;
          }
        }
      }
      return fit;
    }
    if ((pr.g < 0.0) == (g_lo < 0.0)) {
      lo = x;
      g_lo = pr.g;
    } else {
      hi = x;
    }
    double next = pr.dg != 0.0 ? x - pr.g / pr.dg : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      fit.lambda = next;
      return fit;
    }
    x = next;
  }
  std::ostringstream msg;
  msg << "extract_lambda did not converge in " << opts.max_iters << " iterations (|g|/<J,J> = "
      << fit.relative_residual << ")";
  throw MeasuredViolation(ErrorCode::kMaxIters, msg.str(), fit.relative_residual);
}

Decomposition decompose(const FieldState& state, double lambda, double lambda_dot,
                        const W0Coefficients& coeffs) {
  check_consistent(state);
  const auto& g = *state.grid;
  const SolitonProfile p(state.k, lambda);
  Decomposition d;
  d.u.resize(g.size());
  d.w0.resize(g.size());
  d.w.resize(g.size());
  std::vector<double> J(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.r(i);
    J[i] = eval_J(p, r);
    d.u[i] = state.phi[i] - eval_I(p, r);
    d.w0[i] = lambda_dot == 0.0 ? 0.0 : eval_w0(p, coeffs, lambda_dot, r);
    d.w[i] = d.u[i] - d.w0[i];
  }
  d.w0_overlap = g.dot(d.w0, J);
  d.w_overlap = g.dot(d.w, J);
  return d;
}

double eps1(const FieldState& state, double lambda) {
  check_consistent(state);
  const auto& g = *state.grid;
  const SolitonProfile p(state.k, lambda);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.r(i);
    acc += g.weights()[i] * (state.phi[i] - eval_I(p, r)) * eval_rdrJ(p, r);
  }
  return 2.0 * lambda * lambda * acc;
}

double n_tilde(int k, double sin_2I, double cos_2I, double u, double r) {
  const double u2 = u * u;
  double quad;  // sin^2 u - u^2
  double cub;   // u - sin(2u)/2
  if (std::abs(u) < 1e-2) {
    quad = u2 * u2 * (-1.0 / 3.0 + u2 * (2.0 / 45.0 - u2 / 315.0));
    cub = u * u2 * (2.0 / 3.0 + u2 * (-2.0 / 15.0 + u2 * 4.0 / 315.0));
  } else {
    const double s = std::sin(u);
    quad = s * s - u2;
    cub = u - 0.5 * std::sin(2.0 * u);
  }
  return static_cast<double>(k) * k * (sin_2I * quad + cos_2I * cub) / (r * r);
}

CalETerms calE_terms(const FieldState& state, double lambda, double lambda_dot,
                     double lambda_ddot, const W0Coefficients& coeffs) {
  const auto d = decompose(state, lambda, lambda_dot, coeffs);
  const auto& g = *state.grid;
  const int k = state.k.value();
  const SolitonProfile p(k, lambda);
  const double rate = lambda_dot / lambda;
  const double c1 = lambda_ddot / lambda - rate * rate;
  const double accel = lambda_ddot - 2.0 * lambda_dot * lambda_dot / lambda;
  CalETerms t;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.r(i);
    const double wgt = g.weights()[i];
    const double J = eval_J(p, r);
    const double rdrJ = eval_rdrJ(p, r);
    const double rdr2J = eval_rdr2J(p, r);
    const auto tc = eval_trig_composites(p, r);
    const double Jdot = rate * rdrJ;
    const double Jddot = c1 * rdrJ + rate * rate * rdr2J;
    t.w_Jdot += wgt * d.w[i] * Jdot;
    t.w_Jddot += wgt * d.w[i] * Jddot;
    t.w0_accel += wgt * d.w0[i] * accel * rdrJ;
    t.quadratic += wgt * d.w[i] * (2.0 * d.w0[i] + d.w[i]) / (r * r) * tc.sin_2I * J;
    t.cubic += wgt * n_tilde(k, tc.sin_2I, tc.cos_2I, d.u[i], r) * J;
  }
  t.w_Jdot *= 2.0 * lambda_dot;
  t.w_Jddot *= lambda;
  t.quadratic *= -static_cast<double>(k) * k * lambda;
  t.cubic *= -lambda;
  return t;
}

double calE(const FieldState& state, double lambda, double lambda_dot, double lambda_ddot,
            const W0Coefficients& coeffs) {
  return calE_terms(state, lambda, lambda_dot, lambda_ddot, coeffs).total();
}

std::vector<double> time_derivative(const std::vector<double>& t, const std::vector<double>& y,
                                    int order) {
  const std::size_t n = t.size();
  if (y.size() != n) throw Error(ErrorCode::kInvalidArgument, "time_derivative: size mismatch");
  if (n < static_cast<std::size_t>(order) + 1) {
    throw Error(ErrorCode::kTraceTooShort, "trace has " + std::to_string(n) +
                                               " rows; derivative of order " +
                                               std::to_string(order) + " needs more");
  }
  const std::size_t width = std::min<std::size_t>(5, n);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t start = i >= width / 2 ? i - width / 2 : 0;
    start = std::min(start, n - width);
    const auto w = fd_weights(t[i], std::span<const double>(t).subspan(start, width), order);
    double acc = 0.0;
    for (std::size_t j = 0; j < width; ++j) acc += w[j] * y[start + j];
    out[i] = acc;
  }
  return out;
}

ModulationTrace modulate_run(const std::vector<FieldState>& snapshots,
                             const ModulationOptions& opts) {
  if (snapshots.size() < 3) {
    throw Error(ErrorCode::kTraceTooShort, "modulation needs at least three snapshots");
  }
  ModulationTrace trace;
  const int k = snapshots.front().k.value();
  trace.k = k;
  W0Coefficients coeffs;
  if (k >= 3) coeffs = cached_constants(k).w0_coefficients();

  double guess = opts.lambda_guess;
  for (const auto& s : snapshots) {
    ModulationRow row;
    row.t = s.t;
    try {
      const auto fit = extract_lambda(s, guess, opts.extract);
      row.lambda = fit.lambda;
      row.ortho_residual = fit.relative_residual;
      row.newton_iters = fit.iters;
      guess = fit.lambda;
    } catch (const Error& e) {
      row.lambda = kNaN;
      row.status = to_string(e.code());
    }
    trace.rows.push_back(row);
  }

  // Differentiate over the rows that extracted successfully.
  std::vector<double> ts, ls;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    if (trace.rows[i].status == "ok") {
      ts.push_back(trace.rows[i].t);
      ls.push_back(trace.rows[i].lambda);
      idx.push_back(i);
    }
  }
  if (ts.size() < 3) {
    throw Error(ErrorCode::kTraceTooShort, "fewer than three snapshots gave a lambda");
  }
  const auto ld = time_derivative(ts, ls, 1);
  const auto ldd = time_derivative(ts, ls, 2);

  for (std::size_t j = 0; j < idx.size(); ++j) {
    auto& row = trace.rows[idx[j]];
    const auto& s = snapshots[idx[j]];
    row.lambda_dot = ld[j];
    row.lambda_ddot = ldd[j];
    const auto& g = *s.grid;
    const SolitonProfile p(k, row.lambda);
    const auto I = sample(g, p, eval_I);
    const auto J = sample(g, p, eval_J);
    const auto rdrJ = sample(g, p, eval_rdrJ);
    std::vector<double> u(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = s.phi[i] - I[i];
    row.E0 = orbital_energy(g, u, s.phi_t, k);
    row.eps1 = eps1(s, row.lambda);
    const double l3 = row.lambda * row.lambda * row.lambda;
    const double l2 = row.lambda * row.lambda;
    row.ode_residual = row.lambda_dot * (2.0 * l2 * g.dot(I, J) + l2 * g.dot(s.phi, rdrJ)) +
                       g.dot(s.phi_t, J) * l3;
    if (coeffs.valid) {
      const auto d = decompose(s, row.lambda, row.lambda_dot, coeffs);
      row.w0_overlap = d.w0_overlap;
      row.calE = calE(s, row.lambda, row.lambda_dot, row.lambda_ddot, coeffs);
    } else {
      row.calE = kNaN;
      row.status = to_string(ErrorCode::kCoefficientsUnavailable);
    }
  }
  for (auto& row : trace.rows) {
    if (std::isnan(row.lambda)) {
      row.lambda_dot = row.lambda_ddot = row.E0 = row.eps1 = row.calE = kNaN;
      row.ortho_residual = row.ode_residual = kNaN;
    }
  }
  return trace;
}

MorawetzResult morawetz_energy(const std::vector<FieldState>& snapshots,
                               const ModulationTrace& trace, const MorawetzConfig& cfg,
                               const W0Coefficients& coeffs) {
  if (!(cfg.delta > 0.0 && cfg.delta <= 0.5)) {
    throw Error(ErrorCode::kInvalidArgument, "Morawetz delta must lie in (0, 0.5]");
  }
  if (snapshots.size() != trace.rows.size()) {
    throw Error(ErrorCode::kInvalidArgument, "snapshots and trace rows are not aligned");
  }
  std::vector<std::size_t> sel;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    const auto& row = trace.rows[i];
    if (row.t >= cfg.t0 - 1e-12 && row.t <= cfg.t1 + 1e-12 && std::isfinite(row.lambda)) {
      sel.push_back(i);
    }
  }
  if (sel.size() < 3) {
    throw Error(ErrorCode::kInsufficientSnapshots,
                "Morawetz window holds " + std::to_string(sel.size()) + " usable snapshots");
  }
  const int k = trace.k;

  // psi = A_lambda w per snapshot, on its own grid.
  std::vector<std::vector<double>> psi(sel.size());
  for (std::size_t j = 0; j < sel.size(); ++j) {
    const auto& s = snapshots[sel[j]];
    const auto& row = trace.rows[sel[j]];
    const auto d = decompose(s, row.lambda, row.lambda_dot, coeffs);
    psi[j] = DiscreteOperator(OperatorKind::kA, k, row.lambda, s.grid).apply(d.w);
  }

  MorawetzResult res;
  res.snapshots = sel.size();
  std::vector<double> times(sel.size());
  std::vector<double> dens(sel.size());
  for (std::size_t j = 0; j < sel.size(); ++j) times[j] = snapshots[sel[j]].t;

  for (std::size_t j = 0; j < sel.size(); ++j) {
    const auto& s = snapshots[sel[j]];
    const auto& g = *s.grid;
    const double lambda = trace.rows[sel[j]].lambda;
    // three-point stencil in time, one-sided at the window ends
    std::size_t a = j == 0 ? 0 : (j + 1 == sel.size() ? j - 2 : j - 1);
    std::vector<double> tw{times[a], times[a + 1], times[a + 2]};
    const auto cw = fd_weights(times[j], tw, 1);
    std::vector<double> dpsi_dt(g.size(), 0.0);
    for (int m = 0; m < 3; ++m) {
      const auto& other = snapshots[sel[a + m]];
      std::vector<double> on_grid;
      const std::vector<double>* src = &psi[a + m];
      if (!other.grid->same_as(g)) {
        on_grid = interpolate(*other.grid, psi[a + m], g.nodes());
        src = &on_grid;
      }
      for (std::size_t i = 0; i < g.size(); ++i) dpsi_dt[i] += cw[m] * (*src)[i];
    }
    const auto dpsi_dr = g.derivative(psi[j]);
    double fixed = 0.0;
    double flux = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double r = g.r(i);
      const double rd = std::pow(r, cfg.delta);
      const double base = std::pow(lambda * r, cfg.delta) / lambda;
      const double L = dpsi_dt[i] + dpsi_dr[i];
      const double p2 = psi[j][i] * psi[j][i];
      const double w = g.weights()[i];
      fixed += w * base / (1.0 + rd) * (L * L + p2 / (r * r));
      flux += w * (base / ((1.0 + rd) * (1.0 + rd) * r) * L * L + base / (1.0 + rd) * p2 / (r * r * r));
    }
    res.fixed_time_sup = std::max(res.fixed_time_sup, fixed);
    dens[j] = flux;
  }
  for (std::size_t j = 0; j + 1 < sel.size(); ++j) {
    res.spacetime += 0.5 * (times[j + 1] - times[j]) * (dens[j] + dens[j + 1]);
  }
  res.value = res.fixed_time_sup + res.spacetime;
  return res;
}

}  // namespace sigma
