#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sigma_collapse/grid.h"
#include "sigma_collapse/profiles.h"

namespace sigma {

// A_lambda   = -d_r + (k/r) cos I_lambda
// A*_lambda  =  d_r + 1/r + (k/r) cos I_lambda
// H_lambda   = -d_r^2 - (1/r) d_r + Q_lambda,  Q = (k^2/r^2) cos 2I_lambda
// H~_lambda  = -d_r^2 - (1/r) d_r + V_lambda,  V = (k^2+1)/r^2 + (2k/r^2) cos I_lambda
enum class OperatorKind { kA, kAstar, kH, kHtilde, kQPotential, kVPotential };

const char* to_string(OperatorKind kind);

// Banded second-order discretization on a RadialGrid. Every row has at most
// four nonzero entries; rows at the ends use the grid's one-sided stencils.
class DiscreteOperator {
 public:
  DiscreteOperator(OperatorKind kind, int k, double lambda, GridPtr grid);

  OperatorKind kind() const noexcept { return kind_; }
  int k() const noexcept { return k_; }
  double lambda() const noexcept { return lambda_; }
  const GridPtr& grid() const noexcept { return grid_; }
  const Stencil& row(std::size_t i) const noexcept { return rows_[i]; }

  // Throws kGridMismatch when psi does not match the grid.
  std::vector<double> apply(std::span<const double> psi) const;

 private:
  OperatorKind kind_;
  int k_;
  double lambda_;
  GridPtr grid_;
  std::vector<Stencil> rows_;
};

double potential_Q(int k, double lambda, double r);
double potential_V(int k, double lambda, double r);

struct PotentialReport {
  bool positivity = true;     // V >= (k-1)^2 / r^2
  bool repulsivity = true;    // -d_r V >= 2 (k-1)^2 / r^3
  bool time_repulsive = true; // -d_t V >= 0 for lambda_dot >= 0
  // Minima of r^2 (V - (k-1)^2/r^2), r^3 (-d_r V - 2(k-1)^2/r^3) and
  // r^2 (-d_t V); all are bounded below by 0 analytically.
  double positivity_margin = 0.0;
  double repulsivity_margin = 0.0;
  double time_margin = 0.0;
  std::size_t worst_positivity_node = 0;
  std::size_t worst_repulsivity_node = 0;
  std::size_t worst_time_node = 0;
};

// The direct differences are tested with a few-ulp allowance for the
// subtraction; the margins use the cancellation-free closed forms.
PotentialReport verify_potential_properties(int k, double lambda, const RadialGrid& grid,
                                            double lambda_dot = 0.0);

// Max norm of a grid function over nodes with r in [r_lo, r_hi].
double window_max(const RadialGrid& grid, std::span<const double> f, double r_lo, double r_hi);

struct HKResidual {
  double max_abs = 0.0;
  double relative = 0.0;  // max_abs / max |J|
};

// H_1 K + (J + r d_r J) over interior nodes (two rows dropped at each end).
HKResidual residual_HK(int k, const GridPtr& grid);

enum class CoercivityVariant { kApp1, kApp2, kApp3 };
const char* to_string(CoercivityVariant v);

struct CoercivityResult {
  double min_ratio = 0.0;
  std::size_t argmin = 0;
  std::size_t excluded = 0;  // samples rejected by the orthogonality check
  std::vector<double> ratios;
};

// min over the sample of RHS/LHS of the selected inequality; samples with
// |<psi, J_lambda>| > ortho_tol ||psi|| ||J_lambda|| are excluded. Throws
// kEmptySample when nothing is left.
CoercivityResult coercivity_ratio(int k, double lambda, const GridPtr& grid,
                                  const std::vector<std::vector<double>>& sample,
                                  CoercivityVariant variant, double delta = 0.1,
                                  double ortho_tol = 1e-10);

// Sums of at most 8 log-normal bumps with centers log-uniform in
// [1e-2, 1e2], projected orthogonal to J_lambda in the grid inner product.
std::vector<std::vector<double>> random_bump_sample(int k, double lambda, const RadialGrid& grid,
                                                    std::size_t count, std::uint64_t seed);

// Grid used for coercivity studies: geometric, resolving 1e-4 .. 1e4.
GridSpec coercivity_grid_spec();

struct OperatorLevel {
  double h_in = 0.0;
  std::size_t n = 0;
  double kernel = 0.0;         // ||A J||_inf / (lambda ||J||_inf)
  double factorization = 0.0;  // ||(A* A - H) psi|| on the window
  double intertwining = 0.0;   // ||(A H - H~ A) psi|| on the window
  double hk = 0.0;             // residual_HK, relative
  double adjoint = 0.0;        // |<H psi, chi> - <psi, H chi>|
};

struct OperatorVerification {
  int k = 0;
  double lambda = 1.0;
  std::string grid;
  std::vector<OperatorLevel> levels;
  // log2 ratios between consecutive levels; min over pairs.
  double order_kernel = 0.0;
  double order_factorization = 0.0;
  double order_intertwining = 0.0;
  double order_hk = 0.0;
  PotentialReport potentials;
};

// Runs the identity suite on spec and `refine` successive refinements.
// Smooth test functions: psi = r^2 e^{-r} (scaled with lambda), measured on
// r in [0.1, R_max / 2] / lambda.
OperatorVerification verify_operators(int k, double lambda, const GridSpec& spec, int refine);

}  // namespace sigma
