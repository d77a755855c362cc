#include <doctest.h>

#include <cmath>

#include "sigma_collapse/errors.h"
#include "sigma_collapse/odelab.h"

using namespace sigma;

namespace {

double riccati(double C0, double eps0, double t) { return 1.0 / (1.0 - eps0 * t / C0); }

// lambda = sqrt|ln(T - t)| / (T - t) (log) or 1 / (T - t), sampled so that
// lambda runs over [lo, hi] geometrically.
void synthetic(bool log_mod, double T, double lo, double hi, std::vector<double>& t,
               std::vector<double>& l) {
  t.clear();
  l.clear();
  for (int i = 0; i <= 200; ++i) {
    const double target = lo * std::pow(hi / lo, i / 200.0);
    // solve lambda(s) = target for s = T - t by bisection in ln s
    double a = -40.0, b = 5.0;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      const double s = std::exp(m);
      const double v = log_mod ? std::sqrt(std::abs(std::log(s))) / s : 1.0 / s;
      (v > target ? a : b) = m;
    }
    const double s = std::exp(0.5 * (a + b));
    t.push_back(T - s);
    l.push_back(log_mod ? std::sqrt(std::abs(std::log(s))) / s : 1.0 / s);
  }
}

}  // namespace

TEST_CASE("riccati series is the exact hyperbola") {
  OdeModel m;
  m.C0 = 1.0;
  m.eps0 = 0.1;
  OdeOptions o;
  o.rtol = 1e-10;
  o.sample_dt = 0.5;
  const auto s = solve_ode(m, o);
  CHECK(s.status == OdeStatus::kBlowup);
  CHECK(s.T_star == doctest::Approx(10.0).epsilon(1e-9));
  bool found = false;
  double worst = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    // past 1e6 the mu = 1/lambda roundoff alone exceeds the tolerance
    if (s.lambda[i] <= 1e6) worst = std::max(worst, std::abs(s.lambda[i] / riccati(1.0, 0.1, s.t[i]) - 1.0));
    if (s.t[i] == 5.0) {
      found = true;
      CHECK(s.lambda[i] == doctest::Approx(2.0).epsilon(1e-12));
    }
  }
  CHECK(found);
  CHECK(worst <= 10 * o.rtol);
  CHECK(s.lambda.back() > 1e12);
}

TEST_CASE("geodesic and riccati trajectories coincide") {
  OdeModel r;
  r.C0 = 2.0;
  r.eps0 = 0.3;
  OdeModel g = r;
  g.variant = OdeVariant::kGeodesic;
  OdeOptions o;
  o.sample_dt = 0.25;
  const auto a = solve_ode(r, o);
  const auto b = solve_ode(g, o);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.t[i] == b.t[i]);
    CHECK(a.lambda[i] == doctest::Approx(b.lambda[i]).epsilon(1e-12));
  }
}

TEST_CASE("refined model with constant memory source") {
  OdeModel m;
  m.variant = OdeVariant::kRefined;
  m.C0 = 1.0;
  m.eps0 = 0.1;
  m.constant_E = 0.004;
  OdeOptions o;
  o.rtol = 1e-10;
  o.T_end = 20.0;
  o.sample_dt = 0.1;
  const auto s = solve_ode(m, o);
  double worst = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = s.t[i];
    const double exact = 1.0 / (1.0 - (0.1 * t - 0.002 * t * t));
    if (s.lambda[i] <= 1e6) worst = std::max(worst, std::abs(s.lambda[i] / exact - 1.0));
    CHECK(s.memory[i] == doctest::Approx(0.004 * t).epsilon(1e-12).scale(1e-14));
  }
  CHECK(worst <= 10 * o.rtol);
}

TEST_CASE("memory term delays the blowup") {
  double prev = 0.0;
  for (double kappa : {0.0, 0.5, 2.0, 8.0, 20.0}) {
    OdeModel m;
    m.variant = OdeVariant::kRefined;
    m.C0 = 1.0;
    m.eps0 = 0.1;
    m.kappa = kappa;
    const auto s = solve_ode(m, {});
    CAPTURE(kappa);
    REQUIRE(s.status == OdeStatus::kBlowup);
    CHECK(s.T_star > prev);
    prev = s.T_star;
  }
  OdeModel bad;
  bad.variant = OdeVariant::kRefined;
  bad.kappa = -1.0;
  CHECK_THROWS_AS(solve_ode(bad, {}), Error);
  bad.kappa = 0.0;
  bad.eps0 = 0.0;
  CHECK_THROWS_AS(solve_ode(bad, {}), Error);
}

TEST_CASE("self-similar phase onset") {
  OdeModel m;
  m.C0 = 1.0;
  m.eps0 = 0.1;
  OdeOptions o;
  o.sample_dt = 0.5;
  const auto s = solve_ode(m, o);
  const auto rep = self_similar_phase_check(s, 1.0, 0.1);
  REQUIRE(rep.onset.has_value());
  CHECK(*rep.onset == 0.0);
  CHECK(rep.before_bound);
  CHECK(rep.bound == doctest::Approx(40.0));

  m.variant = OdeVariant::kRefined;
  m.kappa = 2.0;
  const auto rs = solve_ode(m, o);
  const auto rr = self_similar_phase_check(rs, 1.0, 0.1);
  REQUIRE(rr.onset.has_value());
  CHECK(std::isfinite(*rr.onset));

  OdeSeries flat;
  for (int i = 0; i < 10; ++i) {
    flat.t.push_back(i);
    flat.lambda.push_back(1.0);
    flat.lambda_dot.push_back(0.0);
  }
  CHECK_FALSE(self_similar_phase_check(flat, 1.0, 0.1).onset.has_value());
  flat.t.resize(2);
  flat.lambda.resize(2);
  flat.lambda_dot.resize(2);
  CHECK_THROWS_AS(self_similar_phase_check(flat, 1.0, 0.1), Error);
}

TEST_CASE("fit_rate recovers synthetic blowup times") {
  std::vector<double> t, l;
  synthetic(true, 1.0, 10.0, 1e6, t, l);
  const auto lm = fit_rate(t, l, RateModel::kLogModified);
  const auto pm = fit_rate(t, l, RateModel::kPureSelfSimilar);
  CHECK(std::abs(lm.T_star - 1.0) <= 1e-3);
  CHECK(lm.residual < 0.01 * pm.residual);
  CHECK(lm.amplitude == doctest::Approx(1.0).epsilon(1e-6));
  // bounded ratio over the last three decades
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l[i] >= 1e3) {
      CHECK(lm.ratio[i] >= 0.9);
      CHECK(lm.ratio[i] <= 1.1);
    }
  }
  CHECK(lm.residual_per_decade.size() == 6);

  synthetic(false, 1.0, 10.0, 1e6, t, l);
  const auto pp = fit_rate(t, l, RateModel::kPureSelfSimilar);
  const auto pl = fit_rate(t, l, RateModel::kLogModified);
  CHECK(std::abs(pp.T_star - 1.0) <= 1e-3);
  CHECK(pp.residual < 0.01 * pl.residual);
}

TEST_CASE("fit_rate on the integrator's own riccati output") {
  OdeModel m;
  m.C0 = 3.0;
  m.eps0 = 0.2;
  const auto s = solve_ode(m, {});
  const auto f = fit_rate(s.t, s.lambda, RateModel::kPureSelfSimilar);
  CHECK(f.T_star == doctest::Approx(15.0).epsilon(1e-6));
}

TEST_CASE("fit_rate rejects narrow series") {
  std::vector<double> t{0, 1, 2, 3}, l{1, 1, 1, 1};
  try {
    fit_rate(t, l, RateModel::kLogModified);
    FAIL("expected insufficient-dynamic-range");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientDynamicRange);
  }
}

TEST_CASE("couple_from_trace") {
  ModulationTrace tr;
  tr.k = 4;
  for (int i = 0; i < 10; ++i) {
    ModulationRow r;
    r.t = i;
    r.lambda = 1.0;
    r.lambda_dot = 0.0;
    r.calE = 0.0;
    tr.rows.push_back(r);
  }
  const auto st = couple_from_trace(tr, 0.0, 100.0);
  CHECK(st.static_model);
  CHECK(st.deviation == 0.0);
  CHECK_THROWS_AS(couple_from_trace(tr, 0.1, 100.0), Error);

  // a trace generated by the refined model itself gives back its kappa
  OdeModel m;
  m.variant = OdeVariant::kRefined;
  m.C0 = 2.0 * std::sqrt(2.0) * M_PI;  // C0 for k = 4
  m.eps0 = 0.1 / M_PI;
  m.kappa = 50.0;
  OdeOptions o;
  o.T_end = 60.0;
  o.sample_dt = 1.0;
  const auto s = solve_ode(m, o);
  ModulationTrace gen;
  gen.k = 4;
  for (std::size_t i = 0; i < s.size(); ++i) {
    ModulationRow r;
    r.t = s.t[i];
    r.lambda = s.lambda[i];
    r.lambda_dot = s.lambda_dot[i];
    r.calE = m.kappa * std::pow(r.lambda_dot, 4) / std::pow(r.lambda, 7);
    gen.rows.push_back(r);
  }
  const auto c = couple_from_trace(gen, 0.1, 60.0);
  CHECK(c.model.kappa == doctest::Approx(50.0).epsilon(1e-12));
  CHECK_FALSE(c.kappa_negative);
  CHECK(c.deviation < 1e-8);
  CHECK(c.trace_excursion > 0.1);

  for (auto& r : gen.rows) r.calE = -r.calE;
  CHECK(couple_from_trace(gen, 0.1, 60.0).kappa_negative);
}
