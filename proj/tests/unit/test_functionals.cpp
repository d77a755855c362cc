#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sigma_collapse/errors.h"
#include "sigma_collapse/functionals.h"

using namespace sigma;

namespace {
constexpr double kPi = std::numbers::pi;

GridPtr fine_grid() {
  return make_grid(GridSpec::parse("two-zone:N=20000,hin=2e-4,rc=2,rmax=4000"));
}
}  // namespace

TEST_CASE("inner products against Beta closed forms") {
  for (int k = 2; k <= 8; ++k) {
    const SolitonProfile p(k, 1.0);
    auto J = [&p](double r) { return eval_J(p, r); };
    const double c0 = inner_product(J, J).value;
    CHECK(c0 == doctest::Approx(2 * kPi / std::sin(kPi / k)).epsilon(1e-8));
    if (k >= 3) {
      const double m2 = inner_product(J, J, Weight::kR3dr).value;
      CHECK(m2 == doctest::Approx(4 * kPi / std::sin(2 * kPi / k)).epsilon(1e-8));
    }
  }
  const SolitonProfile p(4, 1.0);
  CHECK(inner_product([&p](double r) { return eval_J(p, r); }, [](double) { return 0.0; })
            .value == 0.0);
}

TEST_CASE("constants for k = 4") {
  const auto c = compute_constants(4);
  CHECK(c.a == doctest::Approx(-1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-10));
  CHECK(c.b == 0.25);
  CHECK(c.E_soliton == doctest::Approx(16 * kPi));
  const double scale = std::abs(c.T1) + std::abs(c.T2) + std::abs(c.T3);
  CHECK(std::abs(c.Cstar) <= 1e-6 * scale);
  CHECK(c.T1 == doctest::Approx(c.T1_ibp).epsilon(1e-8));
  CHECK(c.T2 == doctest::Approx(c.T2_ibp).epsilon(1e-8));
  CHECK(c.T3 == doctest::Approx(c.T3_ibp).epsilon(1e-8));
  // moment reductions of J^4
  CHECK(c.J4r == doctest::Approx((2.0 * 16 - 2) * c.C0 / 3).epsilon(1e-9));
  CHECK(c.J4r3 == doctest::Approx((2.0 * 16 - 8) * c.JJr2 / 3).epsilon(1e-9));
  CHECK(c.heuristic_constant_abs == doctest::Approx(kPi * c.C0));
  CHECK_THROWS_AS(compute_constants(2), Error);
}

TEST_CASE("soliton energy and defect") {
  const auto g = fine_grid();
  for (double lambda : {1.0, 3.0}) {
    const auto s = soliton_state(g, 4, lambda);
    CHECK(energy(s, 4) == doctest::Approx(16 * kPi).epsilon(1e-6));
    CHECK(std::abs(bogomolny_defect(s, 4)) < 1e-5);
    CHECK(topological_term(s, 4) == doctest::Approx(16 * kPi).epsilon(1e-12));
  }
  FieldState zero;
  zero.grid = g;
  zero.phi.assign(g->size(), 0.0);
  zero.phi_t.assign(g->size(), 0.0);
  CHECK(energy(zero, 4) == 0.0);
  CHECK(bogomolny_defect(zero, 4) == 0.0);
  CHECK(topological_term(zero, 4) == 0.0);
}

TEST_CASE("defect of perturbed soliton") {
  const auto g = fine_grid();
  auto s = soliton_state(g, 4, 1.0);
  const auto bump = log_bump(0.05, 1.5, 0.4);
  for (std::size_t i = 0; i < g->size(); ++i) {
    s.phi[i] += bump.value(g->r(i));
    s.phi_t[i] = 0.5 * bump.value(g->r(i));
  }
  const double e = energy(s, 4);
  const double d = bogomolny_defect(s, 4);
  CHECK(d > 0.0);
  CHECK(d + topological_term(s, 4) == doctest::Approx(e).epsilon(1e-6));
}

TEST_CASE("under-resolved energy is rejected") {
  const auto coarse = make_grid(GridSpec::parse("uniform:N=40,rmax=40"));
  const auto s = soliton_state(coarse, 4, 10.0);
  CHECK_THROWS_AS(energy(s, 4), MeasuredViolation);
}

TEST_CASE("orbital energy") {
  const auto g = fine_grid();
  const SolitonProfile p(4, 1.0);
  const double C0 = 2 * std::sqrt(2.0) * kPi;
  const double eps = 0.1;
  std::vector<double> u(g->size(), 0.0), v(g->size());
  for (std::size_t i = 0; i < g->size(); ++i) v[i] = eps / kPi / C0 * eval_J(p, g->r(i));
  CHECK(orbital_energy(*g, u, v, 4) ==
        doctest::Approx(eps * eps / (2 * kPi * kPi) / C0).epsilon(1e-6));
  std::vector<double> zero(g->size(), 0.0);
  CHECK(orbital_energy(*g, zero, zero, 4) == 0.0);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double r = g->r(i);
    u[i] = 1e-3 * r * r * eval_J(p, r);
  }
  const double e = orbital_energy(*g, u, zero, 4);
  CHECK(e > 0.0);
  CHECK(std::isfinite(e));
}

TEST_CASE("weighted norm") {
  CHECK(h21_norm(SmoothRadial::zero(), SmoothRadial::zero()) == 0.0);
  const SolitonProfile p(4, 1.0);
  SmoothRadial J;
  J.f = [p](double r) { return eval_J(p, r); };
  J.d1 = [p](double r) { return eval_rdrJ(p, r) / r; };
  J.d2 = [p](double r) { return (eval_rdr2J(p, r) - eval_rdrJ(p, r)) / (r * r); };
  const double n1 = h21_norm(SmoothRadial::zero(), J);
  const double n2 = h21_norm(J, SmoothRadial::zero());
  CHECK(std::isfinite(n1));
  CHECK(n1 > 0.0);
  CHECK(std::isfinite(n2));
  CHECK(n2 > 0.0);
  SmoothRadial bad;
  bad.f = [](double r) { return std::sqrt(r); };
  CHECK_THROWS_AS(h21_norm(bad, SmoothRadial::zero()), MeasuredViolation);
}

TEST_CASE("log bump derivatives") {
  const auto b = log_bump(0.3, 2.0, 0.5);
  for (double r : {0.7, 2.0, 3.3}) {
    const double h = 1e-5;
    CHECK(b.deriv(r) == doctest::Approx((b.value(r + h) - b.value(r - h)) / (2 * h)).epsilon(1e-7));
    CHECK(b.deriv2(r) ==
          doctest::Approx((b.deriv(r + h) - b.deriv(r - h)) / (2 * h)).epsilon(1e-7));
  }
}

TEST_CASE("initial data") {
  const auto g = fine_grid();
  const auto s = make_initial_data(g, 4, 0.1, SmoothRadial::zero(), SmoothRadial::zero());
  std::size_t i1 = 0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    if (std::abs(g->r(i) - 1.0) < std::abs(g->r(i1) - 1.0)) i1 = i;
  }
  const SolitonProfile p(4, 1.0);
  const double expected = 0.1 / kPi / (2 * std::sqrt(2.0) * kPi) * eval_J(p, g->r(i1));
  CHECK(s.phi_t[i1] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(0.1 / kPi / (2 * std::sqrt(2.0) * kPi) * 4 == doctest::Approx(1.43289e-2).epsilon(1e-5));

  const auto st = make_initial_data(g, 4, 0.0, SmoothRadial::zero(), SmoothRadial::zero());
  for (double v : st.phi_t) CHECK(v == 0.0);

  // kinetic-only excess over the soliton energy
  const double kin = kPi * g->dot(s.phi_t, s.phi_t);
  CHECK(energy(s, 4) - 16 * kPi == doctest::Approx(kin).epsilon(1e-4));

  SmoothRadial J;
  J.f = [p](double r) { return eval_J(p, r); };
  CHECK_THROWS_AS(make_initial_data(g, 4, 0.1, J, SmoothRadial::zero()), MeasuredViolation);

  const auto u0 = project_out_J(log_bump(1.0, 2.0, 0.3), 4);
  CHECK(std::abs(inner_product([&](double r) { return u0.value(r); },
                               [&](double r) { return eval_J(p, r); })
                     .value) < 1e-10);
  InitialDataOptions opts;
  opts.c0 = 0.35;
  CHECK_THROWS_AS(make_initial_data(g, 4, 0.1, u0, SmoothRadial::zero(), opts),
                  MeasuredViolation);
  const double n = h21_norm(u0, SmoothRadial::zero());
  const auto small = scaled(u0, 0.5 * 0.35 * 0.1 / std::sqrt(n));
  CHECK_NOTHROW(make_initial_data(g, 4, 0.1, small, SmoothRadial::zero(), opts));
}
