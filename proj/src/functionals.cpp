#include "sigma_collapse/functionals.h"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "sigma_collapse/errors.h"

namespace sigma {

namespace {

constexpr double kPi = std::numbers::pi;

double sin_reduced(double phi) {
  return std::sin(phi - kPi * std::nearbyint(phi / kPi)) *
         (static_cast<long long>(std::nearbyint(phi / kPi)) % 2 == 0 ? 1.0 : -1.0);
}

}  // namespace

QuadratureResult inner_product(const RadialFunction& f, const RadialFunction& g, Weight weight,
                               const QuadratureScheme& scheme) {
  const RadialFunction integrand = [&f, &g, weight](double r) {
    const double fv = f(r);
    if (fv == 0.0) return 0.0;
    const double m = weight == Weight::kRdr ? r : r * r * r;
    return fv * g(r) * m;
  };
  return integrate(integrand, scheme);
}

PaperConstants compute_constants(int k, const QuadratureScheme& scheme) {
  if (k < 3) {
    throw Error(ErrorCode::kDivergentIntegrand,
                "<J, r^2 J> diverges for k = " + std::to_string(k) + "; constants need k >= 3");
  }
  const SolitonProfile p(k, 1.0);
  PaperConstants c;
  c.k = k;
  auto J = [&p](double r) { return eval_J(p, r); };
  auto record = [&c](const char* name, const QuadratureResult& q) {
    c.err_estimates[name] = q.error;
    return q.value;
  };

  c.C0 = record("C0", inner_product(J, J, Weight::kRdr, scheme));
  c.JJr2 = record("JJr2", inner_product(J, J, Weight::kR3dr, scheme));
  c.a = -0.25 * c.JJr2 / c.C0;
  c.b = 0.25;
  const double a = c.a;
  const double b = c.b;
  const double kk = static_cast<double>(k) * k;

  // w(r) = a J + b r^2 J, the lambda = 1 profile of w0.
  auto w = [&p, a, b](double r) { return a * eval_J(p, r) + b * eval_r2J(p, r); };
  auto rdr_w = [&p, a, b](double r) {
    const double rdrJ = eval_rdrJ(p, r);
    return a * rdrJ + b * (2.0 * r * r * eval_J(p, r) + r * r * rdrJ);
  };

  c.T1 = record("T1", integrate(
                          [&](double r) {
                            const double wv = w(r);
                            const auto tc = eval_trig_composites(p, r);
                            return -kk * wv * wv / (r * r) * tc.sin_2I * eval_J(p, r) * r;
                          },
                          scheme));
  c.T2 = record("T2", integrate([&](double r) { return w(r) * eval_rdrJ(p, r) * r; }, scheme));
  c.T3 = record("T3",
                integrate([&](double r) { return -rdr_w(r) * eval_rdrJ(p, r) * r; }, scheme));
  c.Cstar = c.T1 + c.T2 + c.T3;

  c.J4r = record("J4r", integrate(
                            [&](double r) {
                              const double j = eval_J(p, r);
                              return j * j * j * j * r;
                            },
                            scheme));
  c.J4r3 = record("J4r3", integrate(
                              [&](double r) {
                                const double j = eval_J(p, r);
                                return j * j * j * j * r * r * r;
                              },
                              scheme));
  c.T1_ibp = 2.0 * a * b * c.J4r + 2.0 * b * b * c.J4r3;
  c.T2_ibp = -a * c.C0 - 2.0 * b * c.JJr2;
  c.T3_ibp = a * c.J4r + b * c.J4r3 + 4.0 * b * c.JJr2;
  c.E_soliton = 4.0 * kPi * k;
  c.heuristic_constant_abs = kPi * c.C0;
  return c;
}

const PaperConstants& cached_constants(int k) {
  static std::mutex mu;
  static std::map<int, PaperConstants> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(k);
  if (it == cache.end()) it = cache.emplace(k, compute_constants(k)).first;
  return it->second;
}

namespace {

// Face-difference gradient energy sum_j f_j (phi_j - phi_{j-1})^2 / d_j.
double gradient_sum(const RadialGrid& g, std::span<const double> f) {
  const auto nodes = g.nodes();
  const auto faces = g.faces();
  double acc = 0.0;
  for (std::size_t j = 1; j < nodes.size(); ++j) {
    const double d = nodes[j] - nodes[j - 1];
    const double diff = f[j] - f[j - 1];
    acc += faces[j] * diff * diff / d;
  }
  return acc;
}

void check_resolution(const FieldState& s, int k) {
  const auto& g = *s.grid;
  const std::size_t n = g.size();
  std::vector<double> dens(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = g.r(i);
    const double dphi = g.d1(i).apply(s.phi);
    const double sn = sin_reduced(s.phi[i]);
    dens[i] = (s.phi_t[i] * s.phi_t[i] + dphi * dphi + k * k * sn * sn / (r * r)) * r;
    peak = std::max(peak, dens[i]);
  }
  if (!(peak > 0.0)) return;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double hi = std::max(dens[i], dens[i + 1]);
    if (hi < 0.25 * peak) continue;
    if (std::abs(dens[i + 1] - dens[i]) > 0.5 * hi) {
      std::ostringstream msg;
      msg << "energy density changes by more than 50% between r=" << g.r(i) << " and r="
          << g.r(i + 1);
      throw MeasuredViolation(ErrorCode::kGridTooCoarse, msg.str(),
                              std::abs(dens[i + 1] - dens[i]) / hi);
    }
  }
}

}  // namespace

double energy(const FieldState& state, int k) {
  check_consistent(state);
  check_resolution(state, k);
  return discrete_energy(state, k);
}

double discrete_energy(const FieldState& state, int k) {
  check_consistent(state);
  const auto& g = *state.grid;
  const auto w = g.weights();
  double kinetic = 0.0;
  double potential = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.r(i);
    const double sn = sin_reduced(state.phi[i]);
    kinetic += w[i] * state.phi_t[i] * state.phi_t[i];
    potential += w[i] * k * k * sn * sn / (r * r);
  }
  return kPi * (kinetic + gradient_sum(g, state.phi) + potential);
}

double bogomolny_defect(const FieldState& state, int k) {
  check_consistent(state);
  check_resolution(state, k);
  return discrete_defect(state, k);
}

double discrete_defect(const FieldState& state, int k) {
  check_consistent(state);
  const auto& g = *state.grid;
  const auto w = g.weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.r(i);
    const double bog = g.d1(i).apply(state.phi) - k * sin_reduced(state.phi[i]) / r;
    acc += w[i] * (state.phi_t[i] * state.phi_t[i] + bog * bog);
  }
  return kPi * acc;
}

double topological_term(const FieldState& state, int k) {
  check_consistent(state);
  return 2.0 * kPi * k * (1.0 - std::cos(state.phi.back()));
}

double orbital_energy(const RadialGrid& grid, std::span<const double> u,
                      std::span<const double> phi_t, int k) {
  if (u.size() != grid.size() || phi_t.size() != grid.size()) {
    throw Error(ErrorCode::kGridMismatch, "orbital_energy: size mismatch");
  }
  const auto w = grid.weights();
  double acc = gradient_sum(grid, u);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.r(i);
    acc += w[i] * (phi_t[i] * phi_t[i] + k * k * u[i] * u[i] / (r * r));
  }
  return 0.5 * acc;
}

SmoothRadial SmoothRadial::zero() {
  SmoothRadial z;
  z.f = [](double) { return 0.0; };
  z.d1 = [](double) { return 0.0; };
  z.d2 = [](double) { return 0.0; };
  return z;
}

double SmoothRadial::deriv(double r) const {
  if (d1) return d1(r);
  if (!f) return 0.0;
  const double h = 1e-5 * (r > 0.0 ? r : 1e-8);
  return (f(r + h) - f(r - h)) / (2.0 * h);
}

double SmoothRadial::deriv2(double r) const {
  if (d2) return d2(r);
  if (!f) return 0.0;
  const double h = 1e-4 * (r > 0.0 ? r : 1e-8);
  return (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
}

SmoothRadial log_bump(double amplitude, double center, double width) {
  const double s2 = width * width;
  SmoothRadial b;
  b.f = [=](double r) {
    if (r <= 0.0) return 0.0;
    const double L = std::log(r / center);
    return amplitude * std::exp(-L * L / (2.0 * s2));
  };
  b.d1 = [=](double r) {
    if (r <= 0.0) return 0.0;
    const double L = std::log(r / center);
    return amplitude * std::exp(-L * L / (2.0 * s2)) * (-L / (s2 * r));
  };
  b.d2 = [=](double r) {
    if (r <= 0.0) return 0.0;
    const double L = std::log(r / center);
    const double v = amplitude * std::exp(-L * L / (2.0 * s2));
    return v * (L * L / (s2 * s2 * r * r) + (L - 1.0) / (s2 * r * r));
  };
  return b;
}

SmoothRadial scaled(const SmoothRadial& f, double factor) {
  SmoothRadial s;
  s.f = [f, factor](double r) { return factor * f.value(r); };
  s.d1 = [f, factor](double r) { return factor * f.deriv(r); };
  s.d2 = [f, factor](double r) { return factor * f.deriv2(r); };
  return s;
}

SmoothRadial project_out_J(const SmoothRadial& f, int k) {
  const SolitonProfile p(k, 1.0);
  const auto& c = cached_constants(k);
  const double coef =
      inner_product([&f](double r) { return f.value(r); }, [&p](double r) { return eval_J(p, r); })
          .value /
      c.C0;
  SmoothRadial out;
  out.f = [f, p, coef](double r) { return f.value(r) - coef * eval_J(p, r); };
  out.d1 = [f, p, coef](double r) { return f.deriv(r) - coef * eval_rdrJ(p, r) / r; };
  out.d2 = [f, p, coef](double r) {
    return f.deriv2(r) - coef * (eval_rdr2J(p, r) - eval_rdrJ(p, r)) / (r * r);
  };
  return out;
}

double h21_norm(const SmoothRadial& u0, const SmoothRadial& g0, const QuadratureScheme& scheme) {
  auto integrand = [&](double r) {
    const double g = g0.value(r);
    const double gp = g0.deriv(r);
    const double u = u0.value(r);
    const double up = u0.deriv(r);
    const double upp = u0.deriv2(r);
    const double r2 = r * r;
    const double i0 = (1.0 + r2) * (g * g + g * g / r2 + up * up + u * u / r2);
    const double i1 = gp * gp + g * g / r2 + upp * upp + up * up / r2;
    return (i0 + i1) * r;
  };
  // Integrable at the origin iff r * integrand(r) -> 0; a value of r F(r) that
  // does not decrease over four decades signals a divergent norm.
  double prev = 0.0;
  bool growing = true;
  for (double r : {1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
    const double m = std::abs(r * integrand(r));
    if (r < 1e-4 && m < 0.9 * prev) growing = false;
    prev = m;
  }
  if (growing && prev > 1e-12) {
    throw MeasuredViolation(ErrorCode::kDivergentIntegrand,
                            "H^{2,1} integrand is not integrable at r = 0", prev);
  }
  return integrate(integrand, scheme).value;
}

FieldState make_initial_data(const GridPtr& grid, int k, double eps, const SmoothRadial& u0,
                             const SmoothRadial& g0, const InitialDataOptions& opts) {
  const SolitonProfile p(k, 1.0);
  const auto& c = cached_constants(k);
  auto J = [&p](double r) { return eval_J(p, r); };
  auto u = [&u0](double r) { return u0.value(r); };

  const double uj = inner_product(u, J).value;
  const double uu = inner_product(u, u).value;
  if (std::abs(uj) > opts.ortho_tol * std::sqrt(uu * c.C0) && std::abs(uj) > 1e-300) {
    throw MeasuredViolation(ErrorCode::kOrthogonalityViolation,
                            "initial perturbation u0 is not orthogonal to J", uj);
  }
  const double norm2 = h21_norm(u0, g0);
  const double limit = opts.c0 * opts.c0 * eps * eps;
  if (norm2 > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "||(u0,g0)||^2 = " << norm2 << " exceeds c0^2 eps^2 = " << limit;
    throw MeasuredViolation(ErrorCode::kSmallnessViolation, msg.str(), norm2);
  }

  FieldState s;
  s.grid = grid;
  s.k = HomotopyClass(k);
  s.phi.resize(grid->size());
  s.phi_t.resize(grid->size());
  const double kick = eps / kPi / c.C0;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double r = grid->r(i);
    s.phi[i] = eval_I(p, r) + u0.value(r);
    s.phi_t[i] = kick * eval_J(p, r) + g0.value(r);
  }
  return s;
}

}  // namespace sigma
