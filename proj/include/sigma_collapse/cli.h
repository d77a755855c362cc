#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sigma_collapse/evolve.h"
#include "sigma_collapse/grid.h"
#include "sigma_collapse/io.h"
#include "sigma_collapse/modulation.h"

namespace sigma::cli {

const char* version();

// Collects output files and writes manifest.json (always last) with a
// SHA-256 per file.
class Manifest {
 public:
  explicit Manifest(std::filesystem::path dir) : dir_(std::move(dir)) {}
  void add(const std::filesystem::path& file) { files_.push_back(file); }
  nlohmann::json& doc() { return doc_; }
  void write();

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
  nlohmann::json doc_ = nlohmann::json::object();
};

struct SimulateSettings {
  int k = 4;
  double epsilon = 0.0;
  double c0 = 1.0;
  GridSpec grid;
  double cfl = 0.5;
  double T_end = 0.0;
  std::size_t snapshot_stride = 0;
  std::size_t diag_stride = 100;
  int regrid_depth = 0;
  double gradient_threshold = 0.1;
  // u0 and g0 are log-bumps (projected off J) scaled so that
  // h21_norm = fraction * c0^2 eps^2.
  double perturb_fraction = 0.0;
  double perturb_center = 2.0;
  double perturb_width = 0.4;
  bool inline_modulation = false;
  SnapshotFormat snapshot_format = SnapshotFormat::kBinary;
  std::filesystem::path out_dir;
};

SimulateSettings simulate_settings(const Config& cfg);
FieldState initial_state(const SimulateSettings& s);

struct SimulateSummary {
  RunStatus status = RunStatus::kCompleted;
  std::string message;
  double final_lambda = 0.0;  // NaN without inline modulation or on failure
  double energy_drift = 0.0;  // (E_last - E_0) / E_0 from the diagnostics
  std::size_t snapshots = 0;
  std::size_t regrids = 0;
};

// Runs and writes diagnostics.csv, snapshots and manifest.json into out_dir.
SimulateSummary run_simulate(const SimulateSettings& s);

struct ModulateSettings {
  std::filesystem::path run_dir;
  std::filesystem::path out_dir;
  double delta = 0.1;
  std::optional<std::pair<double, double>> window;
  double lambda_guess = 1.0;
};

struct ModulateSummary {
  ModulationTrace trace;
  std::optional<MorawetzResult> morawetz;
  double t0 = 0.0;
  double t1 = 0.0;
  // c0^2 eps^2 + eps sup lambda_dot^4 / lambda^7 over the window, when the
  // run manifest carries epsilon and c0.
  std::optional<double> bound_scale;
  std::optional<double> ratio;
};

// Writes modulation.csv, morawetz.json and manifest.json into out_dir.
ModulateSummary run_modulate(const ModulateSettings& s);

// Exit status: 0 success, 1 domain error, 2 usage or configuration error.
int dispatch(int argc, char** argv);

}  // namespace sigma::cli
