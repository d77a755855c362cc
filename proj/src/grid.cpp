#include "sigma_collapse/grid.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "sigma_collapse/errors.h"

namespace sigma {

namespace {

// Widths h q, h q^2, ..., h q^n summing to `length`; returns q >= 1.
double solve_growth_ratio(double h, std::size_t n, double length) {
  if (static_cast<double>(n) * h > length * (1.0 + 1e-12)) {
    throw Error(ErrorCode::kInvalidArgument,
                "two-zone grid: outer zone has too many cells for R_max");
  }
  auto total = [h, n](double q) {
    double sum = 0.0;
    double w = h;
    for (std::size_t j = 0; j < n; ++j) {
      w *= q;
      sum += w;
      if (sum > 1e300) break;
    }
    return sum;
  };
  double lo = 1.0;
  double hi = 1.0 + 1e-6;
  while (total(hi) < length) {
    hi = 1.0 + 2.0 * (hi - 1.0);
    if (hi > 10.0) throw Error(ErrorCode::kInvalidArgument, "two-zone grid: ratio diverged");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) < length ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Appends geometric cells starting from faces.back() with first width h*q
// until r_max is reached; the last face is clipped to r_max.
void append_geometric(std::vector<double>& faces, double h, double q, double r_max) {
  double w = h;
  while (faces.back() < r_max) {
    w *= q;
    faces.push_back(faces.back() + w);
  }
  const double prev = faces[faces.size() - 2];
  if (r_max - prev < 0.5 * w && faces.size() > 2) {
    faces.pop_back();
  }
  faces.back() = r_max;
}

std::vector<double> build_faces(const GridSpec& s) {
  if (!(s.r_max > 0.0)) throw Error(ErrorCode::kInvalidArgument, "grid: R_max must be > 0");
  std::vector<double> faces{0.0};
  switch (s.grading) {
    case Grading::kUniform: {
      if (s.n < 3) throw Error(ErrorCode::kInvalidArgument, "uniform grid needs N >= 3");
      const double h = s.r_max / static_cast<double>(s.n);
      for (std::size_t i = 1; i <= s.n; ++i) faces.push_back(h * static_cast<double>(i));
      faces.back() = s.r_max;
      break;
    }
    case Grading::kGeometric: {
      if (!(s.h_in > 0.0) || !(s.ratio >= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "geometric grid needs hin > 0, ratio >= 1");
      }
      faces.push_back(s.h_in);
      append_geometric(faces, s.h_in, s.ratio, s.r_max);
      break;
    }
    case Grading::kTwoZone: {
      if (!(s.h_in > 0.0) || !(s.r_c > 0.0) || s.r_c >= s.r_max) {
        throw Error(ErrorCode::kInvalidArgument, "two-zone grid needs 0 < hin, 0 < rc < rmax");
      }
      const auto n_in = static_cast<std::size_t>(std::llround(s.r_c / s.h_in));
      if (n_in < 2) throw Error(ErrorCode::kInvalidArgument, "two-zone grid: rc/hin < 2");
      for (std::size_t i = 1; i <= n_in; ++i) faces.push_back(s.h_in * static_cast<double>(i));
      const double rc = faces.back();
      if (s.n > 0) {
        if (s.n <= n_in + 2) {
          throw Error(ErrorCode::kInvalidArgument, "two-zone grid: N too small for rc/hin");
        }
        const std::size_t n_out = s.n - n_in;
        const double q = solve_growth_ratio(s.h_in, n_out, s.r_max - rc);
        double w = s.h_in;
        for (std::size_t j = 0; j < n_out; ++j) {
          w *= q;
          faces.push_back(faces.back() + w);
        }
        faces.back() = s.r_max;
      } else {
        if (!(s.ratio >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "two-zone grid: ratio < 1");
        append_geometric(faces, s.h_in, s.ratio, s.r_max);
      }
      break;
    }
  }
  return faces;
}

double parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, "grid spec: bad value for " + key + ": '" + value + "'");
  }
}

}  // namespace

std::vector<double> fd_weights(double x0, std::span<const double> x, int order) {
  // Fornberg (1988), single evaluation point.
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      }
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][order];
  return w;
}

GridSpec default_grid_spec() { return GridSpec::parse("two-zone:N=16001,hin=5e-4,rc=2,rmax=40"); }

GridSpec GridSpec::scaled(double factor) const {
  GridSpec r = *this;
  r.h_in = h_in * factor;
  r.r_c = r_c * factor;
  r.r_max = r_max * factor;
  return r;
}

GridSpec GridSpec::refined() const {
  GridSpec r = *this;
  switch (grading) {
    case Grading::kUniform:
      r.n = 2 * n;
      break;
    case Grading::kGeometric:
      r.h_in = h_in / 2.0;
      r.ratio = std::sqrt(ratio);
      break;
    case Grading::kTwoZone:
      r.h_in = h_in / 2.0;
      if (n > 0) {
        r.n = 2 * n;
      } else {
        r.ratio = std::sqrt(ratio);
      }
      break;
  }
  return r;
}

std::string GridSpec::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (grading) {
    case Grading::kUniform:
      out << "uniform:N=" << n << ",rmax=" << r_max;
      break;
    case Grading::kGeometric:
      out << "geometric:hin=" << h_in << ",ratio=" << ratio << ",rmax=" << r_max;
      break;
    case Grading::kTwoZone:
      out << "two-zone:";
      if (n > 0) out << "N=" << n << ",";
      else out << "ratio=" << ratio << ",";
      out << "hin=" << h_in << ",rc=" << r_c << ",rmax=" << r_max;
      break;
  }
  return out.str();
}

GridSpec GridSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::kConfig, "grid spec must look like '<grading>:key=value,...'");
  }
  const std::string kind = text.substr(0, colon);
  GridSpec s;
  if (kind == "uniform") s.grading = Grading::kUniform;
  else if (kind == "geometric") s.grading = Grading::kGeometric;
  else if (kind == "two-zone") s.grading = Grading::kTwoZone;
  else throw Error(ErrorCode::kConfig, "unknown grid grading '" + kind + "'");

  std::stringstream rest(text.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kConfig, "grid spec item '" + item + "'");
    std::string key = item.substr(0, eq);
    std::transform(key.begin(), key.end(), key.begin(), ::tolower);
    const std::string value = item.substr(eq + 1);
    if (key == "n") s.n = static_cast<std::size_t>(parse_number(key, value));
    else if (key == "hin") s.h_in = parse_number(key, value);
    else if (key == "rc") s.r_c = parse_number(key, value);
    else if (key == "ratio") s.ratio = parse_number(key, value);
    else if (key == "rmax") s.r_max = parse_number(key, value);
    else throw Error(ErrorCode::kConfig, "unknown grid spec key '" + key + "'");
  }
  return s;
}

RadialGrid::RadialGrid(const GridSpec& spec) : spec_(spec), faces_(build_faces(spec)) {
  finish();
}

RadialGrid::RadialGrid(std::vector<double> faces, GridSpec spec)
    : spec_(spec), faces_(std::move(faces)) {
  if (faces_.size() < 4 || faces_.front() != 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "grid faces must start at 0 with >= 3 cells");
  }
  finish();
}

void RadialGrid::finish() {
  const std::size_t n = faces_.size() - 1;
  if (n < 3) throw Error(ErrorCode::kInvalidArgument, "grid needs at least 3 cells");
  nodes_.resize(n);
  widths_.resize(n);
  weights_.resize(n);
  h_min_ = faces_[1] - faces_[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double a = faces_[i];
    const double b = faces_[i + 1];
    if (!(b > a)) throw Error(ErrorCode::kInvalidArgument, "grid faces must be increasing");
    nodes_[i] = 0.5 * (a + b);
    widths_[i] = b - a;
    weights_[i] = 0.5 * (b - a) * (b + a);
    h_min_ = std::min(h_min_, b - a);
  }

  d1_.resize(n);
  d2_.resize(n);
  auto make = [this](std::size_t first, int count, std::size_t at, int order) {
    Stencil s;
    s.first = first;
    s.n = count;
    const auto w = fd_weights(nodes_[at], std::span<const double>(nodes_).subspan(first, count),
                              order);
    std::copy(w.begin(), w.end(), s.c.begin());
    return s;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      d1_[i] = make(0, 3, 0, 1);
      d2_[i] = make(0, 4, 0, 2);
    } else if (i == n - 1) {
      d1_[i] = make(n - 3, 3, i, 1);
      d2_[i] = make(n - 4, 4, i, 2);
    } else {
      d1_[i] = make(i - 1, 3, i, 1);
      d2_[i] = make(i - 1, 3, i, 2);
    }
  }
}

double RadialGrid::dot(std::span<const double> f, std::span<const double> g) const {
  if (f.size() != size() || g.size() != size()) {
    throw Error(ErrorCode::kGridMismatch, "grid function size does not match grid");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += weights_[i] * f[i] * g[i];
  return acc;
}

double RadialGrid::integrate(std::span<const double> f) const {
  if (f.size() != size()) throw Error(ErrorCode::kGridMismatch, "grid function size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += weights_[i] * f[i];
  return acc;
}

std::vector<double> RadialGrid::derivative(std::span<const double> f) const {
  if (f.size() != size()) throw Error(ErrorCode::kGridMismatch, "grid function size mismatch");
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = d1_[i].apply(f);
  return out;
}

std::vector<double> RadialGrid::second_derivative(std::span<const double> f) const {
  if (f.size() != size()) throw Error(ErrorCode::kGridMismatch, "grid function size mismatch");
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = d2_[i].apply(f);
  return out;
}

bool RadialGrid::same_as(const RadialGrid& other) const noexcept {
  return this == &other || faces_ == other.faces_;
}

GridPtr make_grid(const GridSpec& spec) { return std::make_shared<const RadialGrid>(spec); }

std::vector<double> interpolate(const RadialGrid& from, std::span<const double> f,
                                std::span<const double> to_radii) {
  if (f.size() != from.size()) throw Error(ErrorCode::kGridMismatch, "interpolate: size mismatch");
  const auto nodes = from.nodes();
  const std::size_t n = nodes.size();
  std::vector<double> out(to_radii.size());
  for (std::size_t m = 0; m < to_radii.size(); ++m) {
    const double x = to_radii[m];
    if (x >= nodes[n - 1]) {
      out[m] = f[n - 1];
      continue;
    }
    // j: last node with nodes[j] <= x (j = -1 when x < nodes[0]).
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    const long j = static_cast<long>(it - nodes.begin()) - 1;
    long start = j - 1;
    start = std::min<long>(start, static_cast<long>(n) - 4);
    std::array<double, 4> xs{};
    std::array<double, 4> ys{};
    for (int q = 0; q < 4; ++q) {
      const long idx = start + q;
      if (idx >= 0) {
        xs[q] = nodes[idx];
        ys[q] = f[idx];
      } else {
        // odd reflection through the origin
        xs[q] = -nodes[-idx - 1];
        ys[q] = -f[-idx - 1];
      }
    }
    double acc = 0.0;
    for (int a = 0; a < 4; ++a) {
      double basis = 1.0;
      for (int b = 0; b < 4; ++b) {
        if (b != a) basis *= (x - xs[b]) / (xs[a] - xs[b]);
      }
      acc += basis * ys[a];
    }
    out[m] = acc;
  }
  return out;
}

}  // namespace sigma
