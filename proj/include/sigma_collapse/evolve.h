#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sigma_collapse/field.h"

namespace sigma {

enum class RegridPolicy { kNone, kThreshold };

struct EvolveConfig {
  double cfl = 0.5;
  double T_end = 0.0;
  std::size_t snapshot_stride = 0;  // steps between snapshots, 0 = none
  std::size_t diag_stride = 1;      // steps between diagnostics rows
  RegridPolicy regrid = RegridPolicy::kThreshold;
  // Regrid (or stop at the last level) when sup|d_r phi| * h_in exceeds this.
  double gradient_threshold = 0.1;
  int regrid_depth = 0;
  // Admissibility constant: |d_r phi(r)| <= c_state * r for r <= 1.
  double c_state = 1e6;
};

enum class RunStatus { kCompleted, kResolutionExhausted };
const char* to_string(RunStatus s);

struct DiagnosticsRow {
  double t = 0.0;
  double energy = 0.0;
  double defect = 0.0;
  double sup_dphi = 0.0;
  double sup_J = 0.0;  // sup k |sin phi| / r
  std::optional<double> lambda_raw;
};

struct RegridEvent {
  double t = 0.0;
  int level = 0;
  std::string grid;
};

struct RunResult {
  RunStatus status = RunStatus::kCompleted;
  FieldState final_state;
  std::vector<FieldState> snapshots;  // empty when a snapshot sink is given
  std::vector<DiagnosticsRow> diagnostics;
  std::vector<RegridEvent> regrids;
  std::size_t steps = 0;
  std::string message;
};

struct RunHooks {
  // Receives snapshots instead of storing them in RunResult.
  std::function<void(const FieldState&)> snapshot_sink;
  // Optional inline modulation probe for the lambda_raw column.
  std::function<double(const FieldState&)> lambda_probe;
};

// Semi-discrete right-hand side of
//   phi_tt = phi_rr + phi_r / r - k^2 sin(2 phi) / (2 r^2)
// in conservative finite-volume form. The face at r = 0 carries no flux
// (odd reflection) and the last node is held fixed.
std::vector<double> rhs(const FieldState& state);

// Throws kInvalidArgument if |d_r phi| > c_state r somewhere in r <= 1.
void check_admissible(const FieldState& state, double c_state);

// Time stepper for the reduced equation. Kick-drift-kick leapfrog in which
// nodes with k |dt| / r > 1/2 drift by the exact rotation of the linear part
// k^2 phi / r^2 of the potential; the kicks carry the remainder. The step is
// symmetric, hence time-reversible, and second order.
class Integrator {
 public:
  Integrator(GridPtr grid, int k, double dt);

  double dt() const noexcept { return dt_; }
  const GridPtr& grid() const noexcept { return grid_; }

  // Advances in place by dt (which may be negative). Throws kNanDetected with
  // the first offending node.
  void step(FieldState& state) const;

 private:
  void kick(FieldState& s, double h) const;

  GridPtr grid_;
  int k_;
  double dt_;
  std::vector<double> omega_;  // 0 for nodes that drift plainly
  std::vector<double> cos_;
  std::vector<double> sin_;
};

// Single step by dt; throws kCflViolation if |dt| > cfl * h_min.
FieldState step(const FieldState& state, double dt, double cfl = 0.5);

// Evolves to cfg.T_end. Rejects R_max <= T_end (the frozen outer boundary
// must stay causally disconnected), inadmissible or infinite-energy data.
RunResult run(const FieldState& initial, const EvolveConfig& cfg, const RunHooks& hooks = {});

// Fourth-order transfer of a state to a new grid. The outermost node keeps
// its old boundary value.
FieldState transfer(const FieldState& s, const GridPtr& to);

}  // namespace sigma
