// SPDX-License-Identifier: Apache-2.0
//
// Reproducible Monte Carlo experiment orchestration: RMSE-vs-angle and
// RMSE-vs-SNR sweeps, 3D error maps, CRB grids, CSV emission, and the command
// line front end. Trials derive one random stream per (cell, trial) counter, so
// every output is a pure function of configuration and seed regardless of the
// worker count.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmadoa/crb.hpp"
#include "mmadoa/estimator.hpp"

namespace mmadoa {

enum class Experiment { AngleSweep2D, SnrSweep2D, Map3D, CrbOnly };

Experiment experiment_from_string(const std::string& name);
std::string to_string(Experiment e);
Objective objective_from_string(const std::string& name);
std::string to_string(Objective o);

// Co-elevation field of view as 'lo:hi' degree intervals joined by '|', or
// "full" for the whole manifold.
FieldOfView parse_fov_deg(const std::string& text);
std::string fov_string_deg(const FieldOfView& fov);

struct GridSpec {
  double start_deg = 0.0;
  double stop_deg = 0.0;
  double step_deg = 1.0;

  std::vector<double> points_deg() const;
  std::string str() const;
};

struct SweepConfig {
  Experiment experiment = Experiment::AngleSweep2D;
  std::string model_path;
  std::vector<double> snr_db = {20.0};
  int num_snapshots = 100;
  int trials = 500;
  std::vector<Objective> objectives = {Objective::ML};
  std::vector<FieldOfView> fovs;        // empty selects the full manifold
  GridSpec theta_grid{-89.0, 89.0, 1.0};
  GridSpec phi_grid{0.0, 356.0, 4.0};
  std::uint64_t seed = 1;               // fixed default, never from entropy
  int threads = 0;                      // 0 = hardware concurrency
  std::string output_path;

  // Canonical one-line echo written into result files; excludes the worker
  // count so outputs are byte-identical for any thread configuration.
  std::string echo() const;
};

// Flat `key = value` file, '#' comments allowed; unknown keys are an error.
SweepConfig load_sweep_config(const std::string& path);

struct SweepResult {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // cells preformatted at 9 digits
  std::string header_comment;

  int col(const std::string& name) const;                    // throws if missing
  double value(std::size_t row, const std::string& name) const;
};

SweepResult run_angle_sweep_2d(const SweepConfig& config, const PatternModel& model);
SweepResult run_snr_sweep_2d(const SweepConfig& config, const PatternModel& model);
SweepResult run_map_3d(const SweepConfig& config, const PatternModel& model);
SweepResult run_crb_only(const SweepConfig& config, const PatternModel& model);
SweepResult run_sweep(const SweepConfig& config, const PatternModel& model);

void write_sweep_csv(const std::string& path, const SweepResult& result);

// Measurement CSV: '#' metadata line carrying the snapshot count, then
// `port,power` rows. k_override > 0 replaces the stored snapshot count.
void save_measurement(const std::string& path, const PowerMeasurement& meas,
                      const std::string& extra_meta = "");
PowerMeasurement load_measurement(const std::string& path, int k_override = 0);

// Subcommands: synth, fit, eval, simulate, estimate, crb, sweep.
// Returns 0 on success, 1 on validation/usage errors, 2 on runtime failure.
int cli_main(const std::vector<std::string>& args);
int cli_main(int argc, char** argv);

}  // namespace mmadoa
