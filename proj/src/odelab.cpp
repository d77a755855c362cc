#include "sigma_collapse/odelab.h"

#include <algorithm>
#include <array>
#include <boost/math/tools/minima.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sigma_collapse/errors.h"
#include "sigma_collapse/functionals.h"

namespace sigma {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 3>;  // mu = 1/lambda, nu (geodesic mu_dot), memory

double mu_dot(const OdeModel& m, const State& x) {
  switch (m.variant) {
    case OdeVariant::kGeodesic: return x[1];
    case OdeVariant::kRiccati: return -m.eps0 / m.C0;
    case OdeVariant::kRefined: return -(m.eps0 - x[2]) / m.C0;
  }
  return 0.0;
}

void validate(const OdeModel& m, const OdeOptions& o) {
  if (!(m.C0 > 0.0) || !std::isfinite(m.C0)) throw Error(ErrorCode::kInvalidArgument, "C0 must be > 0");
  if (!(m.eps0 > 0.0) || !std::isfinite(m.eps0)) throw Error(ErrorCode::kInvalidArgument, "eps0 must be > 0");
  if (!(o.rtol > 0.0 && o.rtol < 1e-2)) throw Error(ErrorCode::kInvalidArgument, "rtol must lie in (0, 1e-2)");
  if (!(o.T_end > 0.0)) throw Error(ErrorCode::kInvalidArgument, "T_end must be > 0");
  if (!(o.lambda_stop > 1.0)) throw Error(ErrorCode::kInvalidArgument, "lambda_stop must exceed 1");
  if (o.sample_dt < 0.0) throw Error(ErrorCode::kInvalidArgument, "sample_dt must be >= 0");
}

OdeSeries integrate(const OdeModel& m, const OdeOptions& o) {
  auto sys = [&m](const State& x, State& dx, double /*t*/) {
    const double v = mu_dot(m, x);
    dx[0] = v;
    dx[1] = 0.0;
    if (m.variant != OdeVariant::kRefined) {
      dx[2] = 0.0;
    } else if (m.constant_E) {
      dx[2] = *m.constant_E;
    } else {
      dx[2] = m.kappa * v * v * v * v / x[0];
    }
  };
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(1e-300, o.rtol);

  State x{1.0, -m.eps0 / m.C0, 0.0};
  double t = 0.0;
  OdeSeries out;
  auto record = [&] {
    const double mu = x[0];
    out.t.push_back(t);
    out.lambda.push_back(1.0 / mu);
    out.lambda_dot.push_back(-mu_dot(m, x) / (mu * mu));
    out.memory.push_back(x[2]);
  };
  record();

  std::size_t next_out = 0;
  double dt_free = 1e-3 * m.C0 / m.eps0;
  while (t < o.T_end) {
    const double v = mu_dot(m, x);
    double dt = dt_free;
    if (v < 0.0) dt = std::min(dt, 0.5 * x[0] / -v);
    // earliest required landing time ahead of t
    double land = o.T_end;
    if (o.sample_dt > 0.0) {
      const double n = std::floor(t / o.sample_dt * (1.0 + 1e-14) + 1e-9) + 1.0;
      land = std::min(land, n * o.sample_dt);
    }
    while (next_out < o.output_times.size() && o.output_times[next_out] <= t * (1.0 + 1e-14)) ++next_out;
    if (next_out < o.output_times.size()) land = std::min(land, o.output_times[next_out]);
    const bool clipped = t + dt >= land;
    if (clipped) dt = land - t;

    const double dt_try = dt;
    const State before = x;
    const auto r = stepper.try_step(sys, x, t, dt);
    if (r == odeint::fail) {
      dt_free = dt;
      if (dt < 1e-15 * std::max(1.0, std::abs(t))) {
        out.status = OdeStatus::kStepUnderflow;
        std::ostringstream msg;
        msg << "step size " << dt << " underflowed at t = " << t;
        out.message = msg.str();
        break;
      }
      continue;
    }
    if (!(x[0] > 0.0) || !std::isfinite(x[0])) {
      // overshoot through mu = 0; retry smaller
      x = before;
      t -= dt_try;
      dt_free = 0.25 * dt_try;
      if (dt_free < 1e-15 * std::max(1.0, std::abs(t))) {
        out.status = OdeStatus::kStepUnderflow;
        out.message = "mu left (0, inf)";
        break;
      }
      continue;
    }
    if (clipped) {
      t = land;
      dt_free = std::max(dt_free, dt);
    } else {
      dt_free = dt;
    }
    record();
    if (1.0 / x[0] > o.lambda_stop) {
      out.status = OdeStatus::kBlowup;
      break;
    }
  }
  const double v = mu_dot(m, x);
  out.T_star = v < 0.0 ? t + x[0] / -v : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace

const char* to_string(OdeVariant v) {
  switch (v) {
    case OdeVariant::kGeodesic: return "geodesic";
    case OdeVariant::kRiccati: return "riccati";
    case OdeVariant::kRefined: return "refined";
  }
  return "?";
}

OdeVariant parse_ode_variant(const std::string& s) {
  if (s == "geodesic") return OdeVariant::kGeodesic;
  if (s == "riccati") return OdeVariant::kRiccati;
  if (s == "refined") return OdeVariant::kRefined;
  throw Error(ErrorCode::kInvalidArgument, "unknown ODE variant '" + s + "'");
}

const char* to_string(OdeStatus s) {
  switch (s) {
    case OdeStatus::kCompleted: return "completed";
    case OdeStatus::kBlowup: return "blowup";
    case OdeStatus::kStepUnderflow: return "step-underflow";
  }
  return "?";
}

const char* to_string(RateModel m) {
  return m == RateModel::kPureSelfSimilar ? "pure-self-similar" : "log-modified";
}

OdeSeries solve_ode(const OdeModel& model, const OdeOptions& opts) {
  validate(model, opts);
  if (model.variant == OdeVariant::kRefined && !model.constant_E && !(model.kappa >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "kappa must be >= 0");
  }
  return integrate(model, opts);
}

PhaseReport self_similar_phase_check(const OdeSeries& series, double C0, double eps0) {
  const std::size_t n = series.t.size();
  if (n < 3) throw Error(ErrorCode::kSeriesTooShort, "phase check needs at least three samples");
  if (!(C0 > 0.0 && eps0 > 0.0)) throw Error(ErrorCode::kInvalidArgument, "C0 and eps0 must be > 0");
  std::vector<double> ld = series.lambda_dot;
  if (ld.size() != n) ld = time_derivative(series.t, series.lambda, 1);
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = std::pow(ld[i], 4) / std::pow(series.lambda[i], 7);

  PhaseReport rep;
  rep.bound = 4.0 * C0 / eps0;
  std::size_t i = n - 1;
  while (i > 0 && q[i - 1] < q[i]) --i;
  if (i < n - 1) {
    rep.onset = series.t[i];
    rep.before_bound = *rep.onset < rep.bound;
  }
  return rep;
}

RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& lambda, RateModel model) {
  const std::size_t n = t.size();
  if (lambda.size() != n) throw Error(ErrorCode::kInvalidArgument, "fit_rate: size mismatch");
  if (n < 3) throw Error(ErrorCode::kSeriesTooShort, "fit_rate needs at least three samples");
  double lmin = lambda[0], lmax = lambda[0];
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lambda[i] > 0.0) || !std::isfinite(lambda[i]) || !std::isfinite(t[i])) {
      throw Error(ErrorCode::kInvalidArgument, "fit_rate: lambda must be positive and finite");
    }
    if (i > 0 && !(t[i] > t[i - 1])) throw Error(ErrorCode::kInvalidArgument, "fit_rate: times must increase");
    lmin = std::min(lmin, lambda[i]);
    lmax = std::max(lmax, lambda[i]);
  }
  if (lmax < 1e3 * lmin * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "lambda spans " << std::log10(lmax / lmin) << " decades; three are needed";
    throw MeasuredViolation(ErrorCode::kInsufficientDynamicRange, msg.str(), lmax / lmin);
  }

  const double t_last = t.back();
  auto shape = [](RateModel m, double s) {
    const double base = -std::log(s);
    if (m == RateModel::kPureSelfSimilar) return base;
    return base + 0.5 * std::log(std::abs(std::log(s)));
  };
  // rms misfit of ln lambda over [first, n) with the amplitude eliminated
  auto misfit = [&](RateModel m, double x, std::size_t first, double* amp) {
    const double T = t_last + std::exp(x);
    double sum = 0.0;
    std::vector<double> e;
    e.reserve(n - first);
    for (std::size_t i = first; i < n; ++i) {
      const double sh = shape(m, T - t[i]);
      if (!std::isfinite(sh)) return std::numeric_limits<double>::infinity();
      e.push_back(std::log(lambda[i]) - sh);
      sum += e.back();
    }
    const double c = sum / static_cast<double>(e.size());
    double ss = 0.0;
    for (double v : e) ss += (v - c) * (v - c);
    if (amp) *amp = std::exp(c);
    return std::sqrt(ss / static_cast<double>(e.size()));
  };

  const double span = t_last - t.front();
  const double lo = std::log(span * 1e-14);
  const double hi = std::log(span * 10.0);
  constexpr int kBits = 40;

  // seed: pure law on the last decade
  std::size_t first = n;
  while (first > 0 && lambda[first - 1] >= lmax / 10.0) --first;
  first = std::min(first, n - 3);
  const auto seed = boost::math::tools::brent_find_minima(
      [&](double x) { return misfit(RateModel::kPureSelfSimilar, x, first, nullptr); }, lo, hi, kBits);
  const auto best = boost::math::tools::brent_find_minima(
      [&](double x) { return misfit(model, x, 0, nullptr); }, std::max(lo, seed.first - 3.0),
      std::min(hi, seed.first + 3.0), kBits);

  RateFit fit;
  fit.model = model;
  fit.T_star = t_last + std::exp(best.first);
  fit.residual = misfit(model, best.first, 0, &fit.amplitude);
  const double c = std::log(fit.amplitude);
  std::vector<double> ss, cnt;
  for (std::size_t i = 0; i < n; ++i) {
    const double sh = shape(model, fit.T_star - t[i]);
    fit.ratio.push_back(lambda[i] / std::exp(sh));
    const auto d = static_cast<std::size_t>(std::floor(std::log10(lambda[i] / lmin)));
    if (d >= ss.size()) {
      ss.resize(d + 1, 0.0);
      cnt.resize(d + 1, 0.0);
    }
    const double e = std::log(lambda[i]) - sh - c;
    ss[d] += e * e;
    cnt[d] += 1.0;
  }
  for (std::size_t d = 0; d < ss.size(); ++d) {
    fit.residual_per_decade.push_back(cnt[d] > 0 ? std::sqrt(ss[d] / cnt[d]) : 0.0);
  }
  return fit;
}

Coupling couple_from_trace(const ModulationTrace& trace, double eps, double window, double rtol) {
  if (!(eps >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be >= 0");
  if (!(window > 0.0)) throw Error(ErrorCode::kInvalidArgument, "window must be > 0");
  std::vector<const ModulationRow*> rows;
  for (const auto& r : trace.rows) {
    if (r.status != "ok" || !std::isfinite(r.lambda) || !std::isfinite(r.lambda_dot)) continue;
    if (!rows.empty() && r.t - rows.front()->t > window) break;
    rows.push_back(&r);
  }
  if (rows.size() < 3) throw Error(ErrorCode::kTraceTooShort, "fewer than three usable trace rows");

  Coupling c;
  c.rows_used = rows.size();
  c.t0 = rows.front()->t;
  c.t1 = rows.back()->t;
  for (const auto* r : rows) c.trace_excursion = std::max(c.trace_excursion, std::abs(r->lambda - 1.0));
  c.model.variant = OdeVariant::kRefined;
  c.model.C0 = cached_constants(trace.k).C0;
  c.model.eps0 = eps / std::numbers::pi;

  if (eps == 0.0) {
    c.static_model = true;
    c.deviation = c.trace_excursion;
    return c;
  }

  double num = 0.0, den = 0.0, emax = 0.0;
  for (const auto* r : rows) {
    if (!std::isfinite(r->calE)) continue;
    const double q = std::pow(r->lambda_dot, 4) / std::pow(r->lambda, 7);
    num += r->calE * q;
    den += q * q;
    emax = std::max(emax, std::abs(r->calE));
  }
  if (!(den > 0.0) || !(emax > 1e-300)) {
    throw Error(ErrorCode::kFitDegenerate, "calE or lambda_dot^4/lambda^7 vanishes on the window");
  }
  c.model.kappa = num / den;
  c.kappa_negative = c.model.kappa < 0.0;

  OdeOptions o;
  o.rtol = rtol;
  o.T_end = c.t1 - c.t0;
  for (const auto* r : rows) {
    if (r->t > c.t0) o.output_times.push_back(r->t - c.t0);
  }
  validate(c.model, o);
  const auto s = integrate(c.model, o);
  std::size_t j = 0;
  for (const auto* r : rows) {
    const double tt = r->t - c.t0;
    while (j + 1 < s.t.size() && s.t[j] < tt - 1e-12 * std::max(1.0, tt)) ++j;
    if (std::abs(s.t[j] - tt) > 1e-9 * std::max(1.0, tt)) break;  // model stopped early
    c.deviation = std::max(c.deviation, std::abs(s.lambda[j] - r->lambda));
  }
  return c;
}

}  // namespace sigma
