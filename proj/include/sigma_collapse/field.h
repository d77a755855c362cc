#pragma once

#include <vector>

#include "sigma_collapse/grid.h"
#include "sigma_collapse/profiles.h"

namespace sigma {

// Snapshot (t, phi, d_t phi) of the reduced wave map on a radial grid.
struct FieldState {
  double t = 0.0;
  std::vector<double> phi;
  std::vector<double> phi_t;
  GridPtr grid;
  HomotopyClass k{2};

  std::size_t size() const noexcept { return phi.size(); }
};

// phi = I_lambda sampled at the nodes, phi_t = 0.
FieldState soliton_state(const GridPtr& grid, int k, double lambda = 1.0);

// Throws kGridMismatch if the arrays do not match the grid.
void check_consistent(const FieldState& s);

}  // namespace sigma
