#include "sigma_collapse/evolve.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sigma_collapse/errors.h"
#include "sigma_collapse/functionals.h"

namespace sigma {

namespace {

constexpr double kPi = std::numbers::pi;

// sin(2 phi) with 2 phi reduced by multiples of 2 pi, so phi = n pi gives 0.
double sin2(double phi) {
  const double n = std::nearbyint(phi / kPi);
  return std::sin(2.0 * (phi - n * kPi));
}

void nan_scan(const FieldState& s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += s.phi[i] + s.phi_t[i];
  if (std::isfinite(acc)) return;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s.phi[i]) || !std::isfinite(s.phi_t[i])) {
      std::ostringstream msg;
      msg << "non-finite value at node " << i << " (r=" << s.grid->r(i) << ", t=" << s.t << ")";
      throw MeasuredViolation(ErrorCode::kNanDetected, msg.str(), static_cast<double>(i));
    }
  }
}

double sup_gradient(const FieldState& s) {
  const auto& g = *s.grid;
  double m = 0.0;
  for (std::size_t j = 1; j < s.size(); ++j) {
    m = std::max(m, std::abs(s.phi[j] - s.phi[j - 1]) / (g.r(j) - g.r(j - 1)));
  }
  return m;
}

double sup_J(const FieldState& s) {
  const int k = s.k.value();
  double m = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    m = std::max(m, k * std::abs(std::sin(s.phi[i])) / s.grid->r(i));
  }
  return m;
}

// Geometric growth ratio of the outer zone, read off the faces.
double outer_ratio(const RadialGrid& g) {
  const auto w = g.widths();
  const std::size_t n = w.size();
  if (n < 4) return 1.0;
  return std::max(1.0, w[n - 2] / w[n - 3]);
}

}  // namespace

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kCompleted: return "completed";
    case RunStatus::kResolutionExhausted: return "resolution-exhausted";
  }
  return "?";
}

std::vector<double> rhs(const FieldState& state) {
  check_consistent(state);
  const auto& g = *state.grid;
  const std::size_t n = g.size();
  const auto faces = g.faces();
  const auto w = g.weights();
  const double k2 = static_cast<double>(state.k.value()) * state.k.value();
  const auto& phi = state.phi;
  std::vector<double> out(n, 0.0);
  // flux through face j (between nodes j-1 and j)
  double flux_in = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double flux_out = faces[i + 1] * (phi[i + 1] - phi[i]) / (g.r(i + 1) - g.r(i));
    const double r = g.r(i);
    out[i] = (flux_out - flux_in) / w[i] - k2 * sin2(phi[i]) / (2.0 * r * r);
    flux_in = flux_out;
  }
  return out;
}

void check_admissible(const FieldState& state, double c_state) {
  check_consistent(state);
  const auto& g = *state.grid;
  for (std::size_t i = 0; i < g.size() && g.r(i) <= 1.0; ++i) {
    const double d = std::abs(g.d1(i).apply(state.phi));
    if (d > c_state * g.r(i)) {
      std::ostringstream msg;
      msg << "inadmissible data: |d_r phi| = " << d << " at r = " << g.r(i);
      throw MeasuredViolation(ErrorCode::kInvalidArgument, msg.str(), d / g.r(i));
    }
  }
}

Integrator::Integrator(GridPtr grid, int k, double dt) : grid_(std::move(grid)), k_(k), dt_(dt) {
  const std::size_t n = grid_->size();
  omega_.assign(n, 0.0);
  cos_.assign(n, 1.0);
  sin_.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double w = k / grid_->r(i);
    if (w * std::abs(dt) > 0.5) {
      omega_[i] = w;
      cos_[i] = std::cos(w * dt);
      sin_[i] = std::sin(w * dt);
    }
  }
}

void Integrator::kick(FieldState& s, double h) const {
  const auto& g = *grid_;
  const std::size_t n = g.size();
  const auto faces = g.faces();
  const auto w = g.weights();
  const double k2 = static_cast<double>(k_) * k_;
  double flux_in = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double flux_out = faces[i + 1] * (s.phi[i + 1] - s.phi[i]) / (g.r(i + 1) - g.r(i));
    const double r = g.r(i);
    double acc = (flux_out - flux_in) / w[i] - k2 * sin2(s.phi[i]) / (2.0 * r * r);
    acc += omega_[i] * omega_[i] * s.phi[i];
    s.phi_t[i] += h * acc;
    flux_in = flux_out;
  }
}

void Integrator::step(FieldState& s) const {
  const std::size_t n = grid_->size();
  kick(s, 0.5 * dt_);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (omega_[i] > 0.0) {
      const double p = s.phi[i];
      const double v = s.phi_t[i];
      s.phi[i] = p * cos_[i] + v * sin_[i] / omega_[i];
      s.phi_t[i] = -p * omega_[i] * sin_[i] + v * cos_[i];
    } else {
      s.phi[i] += dt_ * s.phi_t[i];
    }
  }
  kick(s, 0.5 * dt_);
  s.t += dt_;
  nan_scan(s);
}

FieldState step(const FieldState& state, double dt, double cfl) {
  check_consistent(state);
  const double limit = cfl * state.grid->h_min();
  if (std::abs(dt) > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "|dt| = " << std::abs(dt) << " exceeds cfl * h_min = " << limit;
    throw MeasuredViolation(ErrorCode::kCflViolation, msg.str(), std::abs(dt));
  }
  FieldState out = state;
  Integrator(state.grid, state.k.value(), dt).step(out);
  return out;
}

FieldState transfer(const FieldState& s, const GridPtr& to) {
  FieldState out;
  out.t = s.t;
  out.k = s.k;
  out.grid = to;
  out.phi = interpolate(*s.grid, s.phi, to->nodes());
  out.phi_t = interpolate(*s.grid, s.phi_t, to->nodes());
  out.phi.back() = s.phi.back();
  out.phi_t.back() = 0.0;
  return out;
}

RunResult run(const FieldState& initial, const EvolveConfig& cfg, const RunHooks& hooks) {
  check_consistent(initial);
  if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cfl must lie in (0, 1]");
  }
  if (!(cfg.T_end >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "T_end must be >= 0");
  if (initial.grid->r_max() <= cfg.T_end + initial.t) {
    std::ostringstream msg;
    msg << "R_max = " << initial.grid->r_max() << " does not exceed T_end = " << cfg.T_end
        << "; the frozen outer boundary would reach the diagnostics";
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  check_admissible(initial, cfg.c_state);
  const int k = initial.k.value();
  if (!std::isfinite(discrete_energy(initial, k))) {
    throw Error(ErrorCode::kInvalidArgument, "initial energy is not finite");
  }

  RunResult res;
  FieldState s = initial;
  const double t_end = initial.t + cfg.T_end;
  int level = 0;

  auto make_row = [&](const FieldState& st) {
    DiagnosticsRow row;
    row.t = st.t;
    row.energy = discrete_energy(st, k);
    row.defect = discrete_defect(st, k);
    row.sup_dphi = sup_gradient(st);
    row.sup_J = sup_J(st);
    if (hooks.lambda_probe) {
      try {
        row.lambda_raw = hooks.lambda_probe(st);
      } catch (const Error&) {
        row.lambda_raw.reset();
      }
    }
    return row;
  };
  auto emit_snapshot = [&](const FieldState& st) {
    if (hooks.snapshot_sink) {
      hooks.snapshot_sink(st);
    } else {
      res.snapshots.push_back(st);
    }
  };

  // dt is fixed per grid level and lands exactly on t_end.
  auto make_integrator = [&](const GridPtr& g) {
    const double remaining = t_end - s.t;
    const double dt_max = cfg.cfl * g->h_min();
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(remaining / dt_max)));
    return Integrator(g, k, remaining > 0.0 ? remaining / static_cast<double>(steps) : dt_max);
  };

  Integrator integ = make_integrator(s.grid);
  res.diagnostics.push_back(make_row(s));
  if (cfg.snapshot_stride > 0) emit_snapshot(s);
  std::size_t step_count = 0;

  while (s.t < t_end - 0.5 * integ.dt()) {
    integ.step(s);
    ++step_count;
    const bool last = s.t >= t_end - 0.5 * integ.dt();
    if (last) s.t = t_end;
    const bool diag_due = cfg.diag_stride > 0 && step_count % cfg.diag_stride == 0;
    if (diag_due || last) res.diagnostics.push_back(make_row(s));
    if (cfg.snapshot_stride > 0 && (step_count % cfg.snapshot_stride == 0)) emit_snapshot(s);

    const double resolution = sup_gradient(s) * s.grid->h_inner();
    if (resolution > cfg.gradient_threshold) {
      if (cfg.regrid == RegridPolicy::kThreshold && level < cfg.regrid_depth) {
        const auto& old = *s.grid;
        GridSpec spec;
        spec.grading = Grading::kTwoZone;
        spec.h_in = 0.5 * old.h_inner();
        spec.r_c = 0.5 * (old.spec().grading == Grading::kTwoZone ? old.spec().r_c : 1.0);
        spec.ratio = outer_ratio(old);
        spec.n = 0;
        spec.r_max = old.r_max();
        const auto fine = make_grid(spec);
        s = transfer(s, fine);
        ++level;
        res.regrids.push_back({s.t, level, spec.describe()});
        integ = make_integrator(fine);
      } else {
        res.status = RunStatus::kResolutionExhausted;
        std::ostringstream msg;
        msg << "sup|d_r phi| * h_in = " << resolution << " exceeds " << cfg.gradient_threshold
            << " at t = " << s.t << " with regrid depth " << level;
        res.message = msg.str();
        if (!(diag_due || last)) res.diagnostics.push_back(make_row(s));
        break;
      }
    }
  }
  res.steps = step_count;
  res.final_state = std::move(s);
  return res;
}

}  // namespace sigma
