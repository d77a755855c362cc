#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sigma_collapse/modulation.h"

namespace sigma {

enum class OdeVariant { kGeodesic, kRiccati, kRefined };
const char* to_string(OdeVariant v);
OdeVariant parse_ode_variant(const std::string& s);

// C0 lambda_dot = eps0 lambda^2 - lambda^2 int_0^t E(s) ds, lambda(0) = 1,
// with E = kappa lambda_dot^4 / lambda^7. For the geodesic and Riccati
// variants kappa is ignored.
struct OdeModel {
  OdeVariant variant = OdeVariant::kRiccati;
  double C0 = 1.0;
  double eps0 = 0.1;
  double kappa = 0.0;
  // Test hook: E(s) replaced by this constant.
  std::optional<double> constant_E;
};

struct OdeOptions {
  double rtol = 1e-10;
  double T_end = 1e6;
  double lambda_stop = 1e12;
  // Steps are clipped to land on multiples of sample_dt (0 = free steps).
  double sample_dt = 0.0;
  // Extra times (ascending) the steps must land on.
  std::vector<double> output_times;
};

enum class OdeStatus { kCompleted, kBlowup, kStepUnderflow };
const char* to_string(OdeStatus s);

struct OdeSeries {
  std::vector<double> t;
  std::vector<double> lambda;
  std::vector<double> lambda_dot;
  std::vector<double> memory;  // int_0^t E
  OdeStatus status = OdeStatus::kCompleted;
  // Blowup time extrapolated from the last step, t + mu / |mu_dot| with mu = 1/lambda.
  double T_star = 0.0;
  std::string message;
  std::size_t size() const { return t.size(); }
};

// Adaptive Dormand-Prince integration in mu = 1/lambda. A step-size underflow
// is not thrown: the series up to the last good state comes back with
// status kStepUnderflow.
OdeSeries solve_ode(const OdeModel& model, const OdeOptions& opts = {});

struct PhaseReport {
  std::optional<double> onset;  // first time after which lambda_dot^4/lambda^7 strictly increases
  double bound = 0.0;           // 4 C0 / eps0
  bool before_bound = false;
};

// Throws kSeriesTooShort below three samples.
PhaseReport self_similar_phase_check(const OdeSeries& series, double C0, double eps0);

enum class RateModel { kPureSelfSimilar, kLogModified };
const char* to_string(RateModel m);

struct RateFit {
  RateModel model = RateModel::kPureSelfSimilar;
  double T_star = 0.0;
  double amplitude = 0.0;  // lambda ~ amplitude * shape(T* - t)
  double residual = 0.0;   // rms misfit of ln lambda
  std::vector<double> residual_per_decade;  // rms per decade of lambda, lowest first
  // lambda (T* - t) / sqrt|ln(T* - t)| (log-modified) or lambda (T* - t) (pure).
  std::vector<double> ratio;
};

// Least squares in ln lambda over T* > t_last. The last decade is first fit
// with the pure law to seed T*. Throws kInsufficientDynamicRange unless the
// series spans three decades of lambda.
RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& lambda, RateModel model);

struct Coupling {
  OdeModel model;
  bool static_model = false;  // eps = 0: lambda stays 1
  bool kappa_negative = false;
  std::size_t rows_used = 0;
  double deviation = 0.0;       // sup |lambda_model - lambda_trace|
  double trace_excursion = 0.0; // sup |lambda_trace - 1|
  double t0 = 0.0;
  double t1 = 0.0;
};

// eps0 = eps / pi, C0 from the constants, kappa = <calE, q> / <q, q> with
// q = lambda_dot^4 / lambda^7 over the rows with t - t_first <= window.
// Throws kFitDegenerate if calE (or q) vanishes on the window.
Coupling couple_from_trace(const ModulationTrace& trace, double eps, double window,
                           double rtol = 1e-10);

}  // namespace sigma
