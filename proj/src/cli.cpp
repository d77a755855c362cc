#include "sigma_collapse/cli.h"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

#include "sigma_collapse/errors.h"
#include "sigma_collapse/functionals.h"
#include "sigma_collapse/odelab.h"
#include "sigma_collapse/operators.h"

#ifndef SIGMA_COLLAPSE_VERSION
#define SIGMA_COLLAPSE_VERSION "dev"
#endif

namespace sigma::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kSimulateKeys = {
    "k", "epsilon", "c0", "grid", "grid.N", "grid.rc", "grid.hin", "grid.Rmax", "grid.ratio",
    "cfl", "T_end", "snapshot_stride", "snapshot_format", "diag_stride", "regrid.depth",
    "regrid.threshold", "perturb.fraction", "perturb.center", "perturb.width",
    "modulation.inline", "out_dir"};

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw Error(ErrorCode::kIo, "cannot create directory " + p.string());
}

json settings_json(const SimulateSettings& s) {
  return json{{"k", s.k},
              {"epsilon", s.epsilon},
              {"c0", s.c0},
              {"grid", s.grid.describe()},
              {"cfl", s.cfl},
              {"T_end", s.T_end},
              {"snapshot_stride", s.snapshot_stride},
              {"snapshot_format", s.snapshot_format == SnapshotFormat::kBinary ? "binary" : "csv"},
              {"diag_stride", s.diag_stride},
              {"regrid.depth", s.regrid_depth},
              {"regrid.threshold", s.gradient_threshold},
              {"perturb.fraction", s.perturb_fraction},
              {"perturb.center", s.perturb_center},
              {"perturb.width", s.perturb_width},
              {"modulation.inline", s.inline_modulation}};
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

}  // namespace

const char* version() { return SIGMA_COLLAPSE_VERSION; }

void Manifest::write() {
  json files = json::array();
  for (const auto& f : files_) {
    files.push_back({{"path", fs::relative(f, dir_).generic_string()},
                     {"bytes", fs::file_size(f)},
                     {"sha256", sha256_file(f)}});
  }
  doc_["version"] = version();
  doc_["files"] = files;
  write_json(dir_ / "manifest.json", doc_);
}

SimulateSettings simulate_settings(const Config& cfg) {
  cfg.require_known(kSimulateKeys);
  SimulateSettings s;
  s.k = static_cast<int>(cfg.get_int("k"));
  s.epsilon = cfg.get_double("epsilon");
  s.c0 = cfg.get_double("c0", 1.0);
  s.T_end = cfg.get_double("T_end");
  s.cfl = cfg.get_double("cfl", 0.5);
  if (cfg.has("grid")) {
    s.grid = GridSpec::parse(cfg.get_string("grid"));
  } else {
    const auto d = default_grid_spec();
    s.grid.grading = Grading::kTwoZone;
    s.grid.h_in = cfg.get_double("grid.hin", d.h_in);
    s.grid.r_c = cfg.get_double("grid.rc", d.r_c);
    s.grid.r_max = cfg.get_double("grid.Rmax", std::max(d.r_max, s.T_end + 20.0));
    if (cfg.has("grid.ratio")) {
      s.grid.ratio = cfg.get_double("grid.ratio");
      s.grid.n = static_cast<std::size_t>(cfg.get_int("grid.N", 0));
    } else {
      s.grid.n = static_cast<std::size_t>(cfg.get_int("grid.N", static_cast<long>(d.n)));
    }
  }
  const long stride = cfg.get_int("snapshot_stride", 0);
  const long diag = cfg.get_int("diag_stride", 100);
  if (stride < 0 || diag < 0) throw Error(ErrorCode::kConfig, "strides must be >= 0");
  s.snapshot_stride = static_cast<std::size_t>(stride);
  s.diag_stride = static_cast<std::size_t>(diag);
  s.snapshot_format = parse_snapshot_format(cfg.get_string("snapshot_format", "binary"));
  s.regrid_depth = static_cast<int>(cfg.get_int("regrid.depth", 0));
  s.gradient_threshold = cfg.get_double("regrid.threshold", 0.1);
  s.perturb_fraction = cfg.get_double("perturb.fraction", 0.0);
  s.perturb_center = cfg.get_double("perturb.center", 2.0);
  s.perturb_width = cfg.get_double("perturb.width", 0.4);
  s.inline_modulation = cfg.get_bool("modulation.inline", false);
  s.out_dir = cfg.get_string("out_dir", "");
  if (s.perturb_fraction < 0.0 || s.perturb_fraction > 1.0) {
    throw Error(ErrorCode::kConfig, "perturb.fraction must lie in [0, 1]");
  }
  return s;
}

FieldState initial_state(const SimulateSettings& s) {
  const auto grid = make_grid(s.grid);
  InitialDataOptions opts;
  opts.c0 = s.c0;
  if (s.perturb_fraction == 0.0 || s.epsilon == 0.0) {
    const auto zero = log_bump(0.0, 1.0, 1.0);
    return make_initial_data(grid, s.k, s.epsilon, zero, zero, opts);
  }
  const auto u0 = project_out_J(log_bump(1.0, s.perturb_center, s.perturb_width), s.k);
  const auto g0 = project_out_J(log_bump(1.0, 0.75 * s.perturb_center, s.perturb_width), s.k);
  const double n = h21_norm(u0, g0);
  const double f = std::sqrt(s.perturb_fraction * s.c0 * s.c0 * s.epsilon * s.epsilon / n);
  return make_initial_data(grid, s.k, s.epsilon, scaled(u0, f), scaled(g0, f), opts);
}

SimulateSummary run_simulate(const SimulateSettings& s) {
  if (s.out_dir.empty()) throw Error(ErrorCode::kConfig, "out_dir is not set");
  const auto start = std::chrono::steady_clock::now();
  ensure_dir(s.out_dir);
  Manifest manifest(s.out_dir);
  manifest.doc()["command"] = "simulate";
  manifest.doc()["config"] = settings_json(s);

  const auto init = initial_state(s);
  EvolveConfig ec;
  ec.cfl = s.cfl;
  ec.T_end = s.T_end;
  ec.snapshot_stride = s.snapshot_stride;
  ec.diag_stride = s.diag_stride;
  ec.regrid = s.regrid_depth > 0 ? RegridPolicy::kThreshold : RegridPolicy::kNone;
  ec.regrid_depth = s.regrid_depth;
  ec.gradient_threshold = s.gradient_threshold;

  RunHooks hooks;
  std::size_t count = 0;
  const char* ext = s.snapshot_format == SnapshotFormat::kBinary ? ".bin" : ".csv";
  hooks.snapshot_sink = [&](const FieldState& st) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%06zu%s", count++, ext);
    write_snapshot(s.out_dir / name, st, s.snapshot_format);
    manifest.add(s.out_dir / name);
  };
  auto guess = std::make_shared<double>(1.0);
  if (s.inline_modulation) {
    hooks.lambda_probe = [guess](const FieldState& st) {
      const double l = extract_lambda(st, *guess).lambda;
      *guess = l;
      return l;
    };
  }
  const auto res = run(init, ec, hooks);

  const auto diag_path = s.out_dir / "diagnostics.csv";
  CsvWriter csv(diag_path, {"t", "energy", "defect", "sup_dphi", "sup_J", "lambda_raw"});
  for (const auto& r : res.diagnostics) {
    csv.row_cells({format_double(r.t), format_double(r.energy), format_double(r.defect),
                   format_double(r.sup_dphi), format_double(r.sup_J),
                   r.lambda_raw ? format_double(*r.lambda_raw) : std::string()});
  }
  csv.close();
  manifest.add(diag_path);

  SimulateSummary sum;
  sum.status = res.status;
  sum.message = res.message;
  sum.snapshots = count;
  sum.regrids = res.regrids.size();
  sum.final_lambda = kNaN;
  for (const auto& r : res.diagnostics) {
    if (r.lambda_raw) sum.final_lambda = *r.lambda_raw;
  }
  const double e0 = res.diagnostics.front().energy;
  sum.energy_drift = (res.diagnostics.back().energy - e0) / e0;

  json regrids = json::array();
  for (const auto& e : res.regrids) regrids.push_back({{"t", e.t}, {"level", e.level}, {"grid", e.grid}});
  manifest.doc()["grid"] = s.grid.describe();
  manifest.doc()["regrids"] = regrids;
  manifest.doc()["status"] = to_string(res.status);
  manifest.doc()["message"] = res.message;
  manifest.doc()["steps"] = res.steps;
  manifest.doc()["final_t"] = res.final_state.t;
  manifest.doc()["energy_drift"] = num(sum.energy_drift);
  manifest.doc()["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  manifest.write();
  return sum;
}

ModulateSummary run_modulate(const ModulateSettings& s) {
  const auto start = std::chrono::steady_clock::now();
  const auto files = list_snapshots(s.run_dir);
  if (files.size() < 3) {
    throw Error(ErrorCode::kTraceTooShort, s.run_dir.string() + " holds " + std::to_string(files.size()) + " snapshots");
  }
  std::vector<FieldState> snaps;
  snaps.reserve(files.size());
  GridPtr last;
  for (const auto& f : files) {
    snaps.push_back(read_snapshot(f, last));
    last = snaps.back().grid;
  }
  ModulationOptions mo;
  mo.lambda_guess = s.lambda_guess;
  ModulateSummary out;
  out.trace = modulate_run(snaps, mo);
  ensure_dir(s.out_dir);
  Manifest manifest(s.out_dir);
  manifest.doc()["command"] = "modulate";
  manifest.doc()["run"] = s.run_dir.string();
  manifest.doc()["delta"] = s.delta;

  const auto mod_path = s.out_dir / "modulation.csv";
  CsvWriter csv(mod_path, {"t", "lambda", "lambda_dot", "lambda_ddot", "E0", "eps1", "calE",
                           "ortho_residual", "newton_iters", "w0_overlap", "ode_residual", "status"});
  for (const auto& r : out.trace.rows) {
    csv.row_cells({format_double(r.t), format_double(r.lambda), format_double(r.lambda_dot),
                   format_double(r.lambda_ddot), format_double(r.E0), format_double(r.eps1),
                   format_double(r.calE), format_double(r.ortho_residual), std::to_string(r.newton_iters),
                   format_double(r.w0_overlap), format_double(r.ode_residual), r.status});
  }
  csv.close();
  manifest.add(mod_path);

  // run parameters for the Morawetz bound, when available
  std::optional<double> eps, c0;
  const auto run_manifest = s.run_dir / "manifest.json";
  if (fs::exists(run_manifest)) {
    std::ifstream in(run_manifest);
    const auto j = json::parse(in, nullptr, false);
    if (!j.is_discarded() && j.contains("config")) {
      const auto& c = j["config"];
      if (c.contains("epsilon") && c["epsilon"].is_number()) eps = c["epsilon"].get<double>();
      if (c.contains("c0") && c["c0"].is_number()) c0 = c["c0"].get<double>();
    }
  }

  const auto& rows = out.trace.rows;
  if (s.window) {
    out.t0 = s.window->first;
    out.t1 = s.window->second;
  } else {
    out.t0 = rows.front().t;
    out.t1 = rows.back().t;
  }
  json mj{{"delta", s.delta}, {"t0", out.t0}, {"t1", out.t1}};
  if (out.trace.k >= 3) {
    MorawetzConfig mc{s.delta, out.t0, out.t1};
    out.morawetz = morawetz_energy(snaps, out.trace, mc, cached_constants(out.trace.k).w0_coefficients());
    mj["value"] = out.morawetz->value;
    mj["fixed_time_sup"] = out.morawetz->fixed_time_sup;
    mj["spacetime"] = out.morawetz->spacetime;
    mj["snapshots"] = out.morawetz->snapshots;
    if (eps && c0) {
      double q = 0.0;
      for (const auto& r : rows) {
        if (r.t < out.t0 - 1e-12 || r.t > out.t1 + 1e-12 || r.status != "ok") continue;
        q = std::max(q, std::pow(r.lambda_dot, 4) / std::pow(r.lambda, 7));
      }
      out.bound_scale = (*c0) * (*c0) * (*eps) * (*eps) + (*eps) * q;
      if (*out.bound_scale > 0.0) out.ratio = out.morawetz->value / *out.bound_scale;
      mj["bound_scale"] = *out.bound_scale;
      mj["ratio"] = out.ratio ? json(*out.ratio) : json(nullptr);
    }
  } else {
    mj["value"] = nullptr;
    mj["note"] = "w0 coefficients need k >= 3";
  }
  const auto mor_path = s.out_dir / "morawetz.json";
  write_json(mor_path, mj);
  manifest.add(mor_path);
  manifest.doc()["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  manifest.write();
  return out;
}

namespace {

json constants_json(const PaperConstants& c) {
  json err = json::object();
  for (const auto& [k, v] : c.err_estimates) err[k] = v;
  return json{{"k", c.k},
              {"C0", c.C0},
              {"JJr2", c.JJr2},
              {"a", c.a},
              {"b", c.b},
              {"Cstar", c.Cstar},
              {"T1", c.T1},
              {"T2", c.T2},
              {"T3", c.T3},
              {"T1_ibp", c.T1_ibp},
              {"T2_ibp", c.T2_ibp},
              {"T3_ibp", c.T3_ibp},
              {"J4r", c.J4r},
              {"J4r3", c.J4r3},
              {"E_soliton", c.E_soliton},
              {"heuristic_constant_abs", c.heuristic_constant_abs},
              {"err_estimates", err}};
}

json operators_json(const OperatorVerification& v) {
  json levels = json::array();
  for (const auto& l : v.levels) {
    levels.push_back({{"h_in", l.h_in},
                      {"n", l.n},
                      {"kernel", l.kernel},
                      {"factorization", l.factorization},
                      {"intertwining", l.intertwining},
                      {"hk", l.hk},
                      {"adjoint", l.adjoint}});
  }
  const auto& p = v.potentials;
  return json{{"k", v.k},
              {"lambda", v.lambda},
              {"grid", v.grid},
              {"levels", levels},
              {"order_kernel", v.order_kernel},
              {"order_factorization", v.order_factorization},
              {"order_intertwining", v.order_intertwining},
              {"order_hk", v.order_hk},
              {"potentials",
               {{"positivity", p.positivity},
                {"repulsivity", p.repulsivity},
                {"time_repulsive", p.time_repulsive},
                {"positivity_margin", p.positivity_margin},
                {"repulsivity_margin", p.repulsivity_margin},
                {"time_margin", p.time_margin}}}};
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(out, j);
  }
}

std::size_t pool_size(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SIGMA_COLLAPSE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = std::min<std::size_t>(n, static_cast<std::size_t>(v));
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

int run_sweep(const Config& cfg, const std::string& out_override) {
  const auto ks = cfg.get_list("k");
  const auto es = cfg.get_list("epsilon");
  const std::vector<std::string> ns = cfg.has("grid.N") ? cfg.get_list("grid.N") : std::vector<std::string>{""};
  const fs::path root = out_override.empty() ? fs::path(cfg.get_string("out_dir")) : fs::path(out_override);
  ensure_dir(root);

  struct Job {
    std::string k, eps, n, name;
    SimulateSummary sum;
    std::string status;
  };
  std::vector<Job> jobs;
  for (const auto& k : ks) {
    for (const auto& e : es) {
      for (const auto& n : ns) {
        Job j{k, e, n, "k" + k + "_eps" + e + (n.empty() ? "" : "_N" + n), {}, {}};
        jobs.push_back(j);
      }
    }
  }
  // validate every point before starting any run
  std::vector<SimulateSettings> settings;
  for (auto& j : jobs) {
    Config c = cfg;
    c.set("k", j.k);
    c.set("epsilon", j.eps);
    if (!j.n.empty()) c.set("grid.N", j.n);
    c.set("out_dir", (root / j.name).string());
    c.set("modulation.inline", "true");
    settings.push_back(simulate_settings(c));
  }

  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        jobs[i].sum = run_simulate(settings[i]);
        jobs[i].status = to_string(jobs[i].sum.status);
      } catch (const Error& e) {
        jobs[i].status = std::string(to_string(e.code()));
        jobs[i].sum.final_lambda = kNaN;
        jobs[i].sum.energy_drift = kNaN;
        std::lock_guard<std::mutex> lock(log_mu);
        std::cerr << "sweep: " << jobs[i].name << ": " << e.what() << "\n";
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = pool_size(jobs.size());
  for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  Manifest manifest(root);
  manifest.doc()["command"] = "sweep";
  const auto path = root / "sweep.csv";
  CsvWriter csv(path, {"run", "k", "epsilon", "grid_N", "status", "final_lambda", "energy_drift"});
  bool failed = false;
  json runs = json::array();
  for (const auto& j : jobs) {
    csv.row_cells({j.name, j.k, j.eps, j.n, j.status, format_double(j.sum.final_lambda),
                   format_double(j.sum.energy_drift)});
    runs.push_back(j.name);
    if (j.status != "completed" && j.status != "resolution-exhausted") failed = true;
  }
  csv.close();
  manifest.add(path);
  manifest.doc()["runs"] = runs;
  manifest.write();
  return failed ? 1 : 0;
}

int run_ode(const std::string& variant, double C0, double eps0, double kappa, const std::string& fit,
            const std::string& out, double T_end, double rtol, double sample_dt) {
  if (out.empty() && fit.empty()) throw Error(ErrorCode::kConfig, "ode needs --out or --fit");
  if (!out.empty()) {
    OdeModel m;
    m.variant = parse_ode_variant(variant);
    m.C0 = C0;
    m.eps0 = eps0;
    m.kappa = kappa;
    OdeOptions o;
    o.T_end = T_end;
    o.rtol = rtol;
    o.sample_dt = sample_dt;
    const auto s = solve_ode(m, o);
    CsvWriter csv(out, {"t", "lambda", "lambda_dot", "memory_integral"});
    for (std::size_t i = 0; i < s.size(); ++i) csv.row({s.t[i], s.lambda[i], s.lambda_dot[i], s.memory[i]});
    csv.close();
    std::cerr << "ode: " << to_string(s.status) << ", T* ~ " << format_double(s.T_star) << "\n";
    if (s.status == OdeStatus::kStepUnderflow) {
      std::cerr << "ode: " << s.message << "\n";
      return 1;
    }
  }
  if (!fit.empty()) {
    const auto table = read_csv(fit);
    const auto ct = table.column("t");
    const auto cl = table.column("lambda");
    std::vector<double> t, l;
    for (const auto& row : table.rows) {
      if (row.size() <= std::max(ct, cl)) continue;
      const double tv = std::strtod(row[ct].c_str(), nullptr);
      const double lv = std::strtod(row[cl].c_str(), nullptr);
      if (std::isfinite(tv) && std::isfinite(lv) && lv > 0.0) {
        t.push_back(tv);
        l.push_back(lv);
      }
    }
    json rep = json::array();
    for (auto model : {RateModel::kPureSelfSimilar, RateModel::kLogModified}) {
      const auto f = fit_rate(t, l, model);
      rep.push_back({{"model", to_string(model)},
                     {"T_star", f.T_star},
                     {"amplitude", f.amplitude},
                     {"residual", f.residual},
                     {"residual_per_decade", f.residual_per_decade}});
    }
    std::cout << rep.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int dispatch(int argc, char** argv) {
  CLI::App app{"Equivariant wave-map collapse toolkit", "sigma-collapse"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  std::string config_path, out;
  auto* sim = app.add_subcommand("simulate", "evolve initial data from a key = value config");
  sim->add_option("--config", config_path, "config file")->required();
  sim->add_option("--out", out, "output directory (overrides out_dir)");

  ModulateSettings ms;
  std::vector<double> window;
  std::string run_dir, mod_out;
  auto* mod = app.add_subcommand("modulate", "extract lambda(t) and diagnostics from a run");
  mod->add_option("--run", run_dir, "run directory")->required();
  mod->add_option("--out", mod_out, "output directory")->required();
  mod->add_option("--delta", ms.delta, "Morawetz weight exponent");
  mod->add_option("--morawetz", window, "Morawetz window t0 t1")->expected(2);
  mod->add_option("--lambda-guess", ms.lambda_guess, "initial lambda guess");

  int ck = 0;
  double tol = 0.0;
  std::string cout_path;
  auto* con = app.add_subcommand("constants", "quadrature constants as JSON");
  con->add_option("--k", ck, "equivariance class")->required();
  con->add_option("--tol", tol, "relative quadrature tolerance");
  con->add_option("--out", cout_path, "output JSON (stdout if absent)");

  int vk = 0, refine = 2;
  double vl = 1.0;
  std::string vgrid = default_grid_spec().describe(), vout;
  auto* ver = app.add_subcommand("verify-operators", "operator identities and potential certificates");
  ver->add_option("--k", vk, "equivariance class")->required();
  ver->add_option("--lambda", vl, "soliton scale");
  ver->add_option("--grid", vgrid, "grid description");
  ver->add_option("--refine", refine, "refinement levels");
  ver->add_option("--out", vout, "output JSON (stdout if absent)");

  std::string variant = "riccati", fit, ode_out;
  double C0 = 1.0, eps0 = 0.0, kappa = 0.0, T_end = 1e6, rtol = 1e-10, sample_dt = 0.1;
  auto* ode = app.add_subcommand("ode", "reduced lambda dynamics");
  ode->add_option("--variant", variant, "geodesic|riccati|refined");
  ode->add_option("--C0", C0, "C0 > 0");
  ode->add_option("--eps0", eps0, "eps0 > 0");
  ode->add_option("--kappa", kappa, "memory coefficient");
  ode->add_option("--fit", fit, "CSV with t,lambda columns to fit");
  ode->add_option("--out", ode_out, "output CSV");
  ode->add_option("--T-end", T_end, "stop time");
  ode->add_option("--rtol", rtol, "relative tolerance");
  ode->add_option("--sample-dt", sample_dt, "steps land on multiples of this (0 = free)");

  std::string sweep_config, sweep_out;
  auto* sw = app.add_subcommand("sweep", "Cartesian product of simulate runs");
  sw->add_option("--config", sweep_config, "config with comma lists for k, epsilon, grid.N")->required();
  sw->add_option("--out", sweep_out, "output directory (overrides out_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      auto s = simulate_settings(Config::load(config_path));
      if (!out.empty()) s.out_dir = out;
      const auto sum = run_simulate(s);
      std::cerr << "simulate: " << to_string(sum.status) << (sum.message.empty() ? "" : " (" + sum.message + ")")
                << "\n";
      return 0;
    }
    if (mod->parsed()) {
      ms.run_dir = run_dir;
      ms.out_dir = mod_out;
      if (window.size() == 2) ms.window = std::make_pair(window[0], window[1]);
      run_modulate(ms);
      return 0;
    }
    if (con->parsed()) {
      QuadratureScheme scheme;
      if (tol > 0.0) scheme.rel_tol = tol;
      emit(constants_json(compute_constants(ck, scheme)), cout_path);
      return 0;
    }
    if (ver->parsed()) {
      emit(operators_json(verify_operators(vk, vl, GridSpec::parse(vgrid), refine)), vout);
      return 0;
    }
    if (ode->parsed()) return run_ode(variant, C0, eps0, kappa, fit, ode_out, T_end, rtol, sample_dt);
    if (sw->parsed()) {
      return run_sweep(Config::load(sweep_config), sweep_out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kConfig ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace sigma::cli
