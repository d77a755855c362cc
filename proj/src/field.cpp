#include "sigma_collapse/field.h"

#include "sigma_collapse/errors.h"

namespace sigma {

FieldState soliton_state(const GridPtr& grid, int k, double lambda) {
  FieldState s;
  s.grid = grid;
  s.k = HomotopyClass(k);
  const SolitonProfile p(k, lambda);
  s.phi.resize(grid->size());
  s.phi_t.assign(grid->size(), 0.0);
  for (std::size_t i = 0; i < grid->size(); ++i) s.phi[i] = eval_I(p, grid->r(i));
  return s;
}

void check_consistent(const FieldState& s) {
  if (!s.grid) throw Error(ErrorCode::kGridMismatch, "field state has no grid");
  if (s.phi.size() != s.grid->size() || s.phi_t.size() != s.grid->size()) {
    throw Error(ErrorCode::kGridMismatch, "field arrays do not match grid size");
  }
}

}  // namespace sigma
