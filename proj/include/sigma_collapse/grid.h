#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sigma {

enum class Grading { kUniform, kGeometric, kTwoZone };

// Parameters that define a cell-centered radial grid on [0, R_max].
//   uniform:   N cells of width R_max / N
//   geometric: first cell [0, h_in], then widths grow by `ratio` until R_max
//   two-zone:  uniform cells of width h_in on [0, r_c], geometric beyond;
//              the growth ratio is solved so that exactly N cells reach R_max
//              (or taken from `ratio` when N == 0).
struct GridSpec {
  Grading grading = Grading::kTwoZone;
  std::size_t n = 0;
  double h_in = 0.0;
  double r_c = 0.0;
  double ratio = 1.0;
  double r_max = 0.0;

  // Same family with every cell halved (inner width /2, ratio -> sqrt(ratio)).
  GridSpec refined() const;
  // Every length multiplied by factor (cell counts and ratios unchanged).
  GridSpec scaled(double factor) const;
  std::string describe() const;

  // Parses "uniform:N=..,rmax=..", "geometric:hin=..,ratio=..,rmax=..",
  // "two-zone:N=..,hin=..,rc=..,rmax=.." (keys in any order).
  static GridSpec parse(const std::string& text);
};

// Finite-difference stencil: (D f)(r_i) ~ sum_{j<n} c[j] * f[first + j].
struct Stencil {
  std::size_t first = 0;
  int n = 0;
  std::array<double, 4> c{};

  double apply(std::span<const double> f) const noexcept {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += c[j] * f[first + j];
    return acc;
  }
};

// Fornberg weights for the `order`-th derivative at x0 from the given nodes.
std::vector<double> fd_weights(double x0, std::span<const double> nodes, int order);

// Cell-centered grid. Nodes sit at cell midpoints, so r_1 = h_in / 2 > 0 and
// the origin is never a node. Quadrature weights are the exact cell volumes
// (f_{i+1}^2 - f_i^2) / 2 of the r dr measure.
class RadialGrid {
 public:
  explicit RadialGrid(const GridSpec& spec);
  // Grid from explicit faces (f_0 = 0 < f_1 < ... < f_N).
  RadialGrid(std::vector<double> faces, GridSpec spec);

  std::size_t size() const noexcept { return nodes_.size(); }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> faces() const noexcept { return faces_; }
  std::span<const double> widths() const noexcept { return widths_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double r(std::size_t i) const noexcept { return nodes_[i]; }
  double r_max() const noexcept { return faces_.back(); }
  double h_min() const noexcept { return h_min_; }
  double h_inner() const noexcept { return widths_.front(); }
  const GridSpec& spec() const noexcept { return spec_; }

  const Stencil& d1(std::size_t i) const noexcept { return d1_[i]; }
  const Stencil& d2(std::size_t i) const noexcept { return d2_[i]; }

  // Grid quadrature of f * g against r dr.
  double dot(std::span<const double> f, std::span<const double> g) const;
  double integrate(std::span<const double> f) const;

  // First and second derivative of a nodal function (one-sided at the ends).
  std::vector<double> derivative(std::span<const double> f) const;
  std::vector<double> second_derivative(std::span<const double> f) const;

  bool same_as(const RadialGrid& other) const noexcept;

 private:
  void finish();

  GridSpec spec_;
  std::vector<double> faces_;
  std::vector<double> nodes_;
  std::vector<double> widths_;
  std::vector<double> weights_;
  std::vector<Stencil> d1_;
  std::vector<Stencil> d2_;
  double h_min_ = 0.0;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

// Grid used when none is configured: fine enough that grid quadrature of the
// soliton energy is accurate to 1e-6 for scales 1/3 <= lambda <= 3.
GridSpec default_grid_spec();

GridPtr make_grid(const GridSpec& spec);

// Fourth-order Lagrange interpolation of nodal data onto new radii. Values
// left of the first node use the odd extension f(-r) = -f(r); radii beyond
// the last node take the last value.
std::vector<double> interpolate(const RadialGrid& from, std::span<const double> f,
                                std::span<const double> to_radii);

}  // namespace sigma
