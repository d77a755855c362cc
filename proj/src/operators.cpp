#include "sigma_collapse/operators.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "sigma_collapse/errors.h"

namespace sigma {

namespace {

// a*s + b*t + diag at node i, merged into one row of width <= 4.
Stencil combine(const Stencil& s, double a, const Stencil& t, double b, std::size_t i,
                double diag) {
  Stencil out;
  std::size_t first = i;
  std::size_t last = i;
  if (a != 0.0) {
    first = std::min(first, s.first);
    last = std::max(last, s.first + s.n - 1);
  }
  if (b != 0.0) {
    first = std::min(first, t.first);
    last = std::max(last, t.first + t.n - 1);
  }
  out.first = first;
  out.n = static_cast<int>(last - first + 1);
  if (a != 0.0) {
    for (int j = 0; j < s.n; ++j) out.c[s.first + j - first] += a * s.c[j];
  }
  if (b != 0.0) {
    for (int j = 0; j < t.n; ++j) out.c[t.first + j - first] += b * t.c[j];
  }
  out.c[i - first] += diag;
  return out;
}

double ulp_of(double x) {
  x = std::abs(x);
  return std::nextafter(x, std::numeric_limits<double>::infinity()) - x;
}

}  // namespace

const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::kA: return "A";
    case OperatorKind::kAstar: return "Astar";
    case OperatorKind::kH: return "H";
    case OperatorKind::kHtilde: return "Htilde";
    case OperatorKind::kQPotential: return "Q";
    case OperatorKind::kVPotential: return "V";
  }
  return "?";
}

const char* to_string(CoercivityVariant v) {
  switch (v) {
    case CoercivityVariant::kApp1: return "c_app1";
    case CoercivityVariant::kApp2: return "c_app2";
    case CoercivityVariant::kApp3: return "c_app3";
  }
  return "?";
}

double potential_Q(int k, double lambda, double r) {
  const auto tc = eval_trig_composites(SolitonProfile(k, lambda), r);
  return static_cast<double>(k) * k * tc.cos_2I / (r * r);
}

double potential_V(int k, double lambda, double r) {
  const auto tc = eval_trig_composites(SolitonProfile(k, lambda), r);
  return (static_cast<double>(k) * k + 1.0 + 2.0 * k * tc.cos_I) / (r * r);
}

DiscreteOperator::DiscreteOperator(OperatorKind kind, int k, double lambda, GridPtr grid)
    : kind_(kind), k_(k), lambda_(lambda), grid_(std::move(grid)) {
  if (!grid_) throw Error(ErrorCode::kInvalidArgument, "operator needs a grid");
  const SolitonProfile p(k, lambda);
  const auto& g = *grid_;
  rows_.resize(g.size());
  const Stencil none;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.r(i);
    const auto tc = eval_trig_composites(p, r);
    const double kcos = k * tc.cos_I / r;
    switch (kind) {
      case OperatorKind::kA:
        rows_[i] = combine(g.d1(i), -1.0, none, 0.0, i, kcos);
        break;
      case OperatorKind::kAstar:
        rows_[i] = combine(g.d1(i), 1.0, none, 0.0, i, 1.0 / r + kcos);
        break;
      case OperatorKind::kH:
        rows_[i] = combine(g.d2(i), -1.0, g.d1(i), -1.0 / r, i, potential_Q(k, lambda, r));
        break;
      case OperatorKind::kHtilde:
        rows_[i] = combine(g.d2(i), -1.0, g.d1(i), -1.0 / r, i, potential_V(k, lambda, r));
        break;
      case OperatorKind::kQPotential:
        rows_[i] = combine(none, 0.0, none, 0.0, i, potential_Q(k, lambda, r));
        break;
      case OperatorKind::kVPotential:
        rows_[i] = combine(none, 0.0, none, 0.0, i, potential_V(k, lambda, r));
        break;
    }
  }
}

std::vector<double> DiscreteOperator::apply(std::span<const double> psi) const {
  if (psi.size() != rows_.size()) {
    throw Error(ErrorCode::kGridMismatch, "operator apply: function has " +
                                              std::to_string(psi.size()) + " values, grid has " +
                                              std::to_string(rows_.size()));
  }
  std::vector<double> out(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) out[i] = rows_[i].apply(psi);
  return out;
}

PotentialReport verify_potential_properties(int k, double lambda, const RadialGrid& grid,
                                            double lambda_dot) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be positive");
  const SolitonProfile p(k, lambda);
  const double km1 = (k - 1.0) * (k - 1.0);
  const double kd = k;
  PotentialReport rep;
  rep.positivity_margin = rep.repulsivity_margin = rep.time_margin =
      std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.r(i);
    const auto tc = eval_trig_composites(p, r);
    const double s2 = tc.sin_I * tc.sin_I;

    const double V = potential_V(k, lambda, r);
    const double bound_v = km1 / (r * r);
    if (V - bound_v < -8.0 * ulp_of(V)) rep.positivity = false;
    const double pm = 2.0 * kd * tc.one_plus_cos_I;
    if (pm < rep.positivity_margin) {
      rep.positivity_margin = pm;
      rep.worst_positivity_node = i;
    }

    const double r3 = r * r * r;
    const double minus_dV = (2.0 * (kd * kd + 1.0) + 4.0 * kd * tc.cos_I + 2.0 * kd * kd * s2) / r3;
    const double bound_dv = 2.0 * km1 / r3;
    if (minus_dV - bound_dv < -16.0 * ulp_of(minus_dV)) rep.repulsivity = false;
    const double rm = 4.0 * kd * tc.one_plus_cos_I + 2.0 * kd * kd * s2;
    if (rm < rep.repulsivity_margin) {
      rep.repulsivity_margin = rm;
      rep.worst_repulsivity_node = i;
    }

    const double tm = (lambda_dot / lambda) * 2.0 * kd * kd * s2;
    if (lambda_dot >= 0.0 && tm < 0.0) rep.time_repulsive = false;
    if (tm < rep.time_margin) {
      rep.time_margin = tm;
      rep.worst_time_node = i;
    }
  }
  if (rep.positivity_margin < 0.0) rep.positivity = false;
  if (rep.repulsivity_margin < 0.0) rep.repulsivity = false;
  return rep;
}

double window_max(const RadialGrid& grid, std::span<const double> f, double r_lo, double r_hi) {
  double m = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.r(i);
    if (r >= r_lo && r <= r_hi) m = std::max(m, std::abs(f[i]));
  }
  return m;
}

HKResidual residual_HK(int k, const GridPtr& grid) {
  const SolitonProfile p(k, 1.0);
  const auto& g = *grid;
  std::vector<double> K(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) K[i] = eval_K(p, g.r(i));
  const auto HK = DiscreteOperator(OperatorKind::kH, k, 1.0, grid).apply(K);
  HKResidual res;
  double jmax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.r(i);
    const double J = eval_J(p, r);
    jmax = std::max(jmax, std::abs(J));
    if (i < 2 || i + 2 >= g.size()) continue;
    res.max_abs = std::max(res.max_abs, std::abs(HK[i] + J + eval_rdrJ(p, r)));
  }
  res.relative = res.max_abs / jmax;
  return res;
}

CoercivityResult coercivity_ratio(int k, double lambda, const GridPtr& grid,
                                  const std::vector<std::vector<double>>& sample,
                                  CoercivityVariant variant, double delta, double ortho_tol) {
  const auto& g = *grid;
  const SolitonProfile p(k, lambda);
  std::vector<double> J(g.size());
  std::vector<double> wt(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.r(i);
    J[i] = eval_J(p, r);
    wt[i] = std::pow(lambda * r, delta) / std::pow(1.0 + r, delta);
  }
  const double jj = std::sqrt(g.dot(J, J));
  const DiscreteOperator A(OperatorKind::kA, k, lambda, grid);

  CoercivityResult res;
  res.min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < sample.size(); ++s) {
    const auto& psi = sample[s];
    if (psi.size() != g.size()) throw Error(ErrorCode::kGridMismatch, "coercivity sample size");
    const double pp = std::sqrt(g.dot(psi, psi));
    if (!(pp > 0.0) || std::abs(g.dot(psi, J)) > ortho_tol * pp * jj) {
      ++res.excluded;
      continue;
    }
    const auto Apsi = A.apply(psi);
    double lhs = 0.0;
    double rhs = 0.0;
    if (variant == CoercivityVariant::kApp1) {
      const auto dpsi = g.derivative(psi);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = g.r(i);
        const double w = g.weights()[i];
        lhs += w * (dpsi[i] * dpsi[i] + psi[i] * psi[i] / (r * r));
        rhs += w * Apsi[i] * Apsi[i];
      }
    } else {
      const int m = variant == CoercivityVariant::kApp2 ? 2 : 3;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = g.r(i);
        const double w = g.weights()[i] * wt[i] / std::pow(r, m);
        lhs += w * psi[i] * psi[i] / (r * r);
        rhs += w * Apsi[i] * Apsi[i];
      }
    }
    const double ratio = rhs / lhs;
    res.ratios.push_back(ratio);
    if (ratio < res.min_ratio) {
      res.min_ratio = ratio;
      res.argmin = s;
    }
  }
  if (res.ratios.empty()) {
    throw Error(ErrorCode::kEmptySample, "no admissible function in the coercivity sample");
  }
  return res;
}

std::vector<std::vector<double>> random_bump_sample(int k, double lambda, const RadialGrid& grid,
                                                    std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_center(std::log(1e-2), std::log(1e2));
  std::uniform_real_distribution<double> width(0.15, 1.0);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_int_distribution<int> nbumps(1, 8);

  const SolitonProfile p(k, lambda);
  std::vector<double> J(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) J[i] = eval_J(p, grid.r(i));
  const double jj = grid.dot(J, J);

  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    std::vector<double> f(grid.size(), 0.0);
    const int nb = nbumps(rng);
    for (int b = 0; b < nb; ++b) {
      const double lc = log_center(rng);
      const double sg = width(rng);
      const double a = amp(rng);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double L = std::log(grid.r(i)) - lc;
        f[i] += a * std::exp(-L * L / (2.0 * sg * sg));
      }
    }
    const double c = grid.dot(f, J) / jj;
    for (std::size_t i = 0; i < grid.size(); ++i) f[i] -= c * J[i];
    out.push_back(std::move(f));
  }
  return out;
}

GridSpec coercivity_grid_spec() {
  GridSpec s;
  s.grading = Grading::kGeometric;
  s.h_in = 1e-4;
  s.ratio = 1.01;
  s.r_max = 1e4;
  return s;
}

namespace {

double observed_order(const std::vector<OperatorLevel>& levels, double OperatorLevel::*field) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < levels.size(); ++i) {
    worst = std::min(worst, std::log2(levels[i - 1].*field / levels[i].*field));
  }
  return levels.size() > 1 ? worst : 0.0;
}

}  // namespace

OperatorVerification verify_operators(int k, double lambda, const GridSpec& spec, int refine) {
  if (refine < 0) throw Error(ErrorCode::kInvalidArgument, "refine must be >= 0");
  OperatorVerification out;
  out.k = k;
  out.lambda = lambda;
  out.grid = spec.describe();
  const SolitonProfile p(k, lambda);

  GridSpec current = spec;
  for (int level = 0; level <= refine; ++level) {
    const auto grid = make_grid(current);
    const auto& g = *grid;
    const std::size_t n = g.size();
    const double r_lo = 0.1 / lambda;
    const double r_hi = std::min(0.5 * g.r_max(), 30.0 / lambda);

    std::vector<double> J(n), psi(n), chi(n), bump(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = g.r(i);
      const double s = lambda * r;
      J[i] = eval_J(p, r);
      psi[i] = s * s * std::exp(-s);
      const double L1 = std::log(s);
      const double L2 = std::log(s / 1.5);
      bump[i] = std::exp(-L1 * L1 / 0.18);
      chi[i] = std::exp(-L2 * L2 / 0.18);
    }
    const DiscreteOperator A(OperatorKind::kA, k, lambda, grid);
    const DiscreteOperator As(OperatorKind::kAstar, k, lambda, grid);
    const DiscreteOperator H(OperatorKind::kH, k, lambda, grid);
    const DiscreteOperator Ht(OperatorKind::kHtilde, k, lambda, grid);

    OperatorLevel lv;
    lv.h_in = g.h_inner();
    lv.n = n;
    double jmax = 0.0;
    for (double v : J) jmax = std::max(jmax, std::abs(v));
    const auto AJ = A.apply(J);
    double ajmax = 0.0;
    for (double v : AJ) ajmax = std::max(ajmax, std::abs(v));
    lv.kernel = ajmax / (lambda * jmax);

    const auto Apsi = A.apply(psi);
    const auto AsA = As.apply(Apsi);
    const auto Hpsi = H.apply(psi);
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = AsA[i] - Hpsi[i];
    lv.factorization = window_max(g, diff, r_lo, r_hi);

    const auto AH = A.apply(Hpsi);
    const auto HtA = Ht.apply(Apsi);
    for (std::size_t i = 0; i < n; ++i) diff[i] = AH[i] - HtA[i];
    lv.intertwining = window_max(g, diff, r_lo, r_hi);

    lv.hk = residual_HK(k, grid).relative;
    lv.adjoint = std::abs(g.dot(H.apply(bump), chi) - g.dot(bump, H.apply(chi)));
    out.levels.push_back(lv);

    if (level == 0) out.potentials = verify_potential_properties(k, lambda, g);
    current = current.refined();
  }
  out.order_kernel = observed_order(out.levels, &OperatorLevel::kernel);
  out.order_factorization = observed_order(out.levels, &OperatorLevel::factorization);
  out.order_intertwining = observed_order(out.levels, &OperatorLevel::intertwining);
  out.order_hk = observed_order(out.levels, &OperatorLevel::hk);
  return out;
}

}  // namespace sigma
