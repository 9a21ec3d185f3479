// SPDX-License-Identifier: Apache-2.0
//
// Angle-of-arrival estimation from one power measurement with unknown signal
// power and noise variance: coarse grid search over the field of view followed
// by box-constrained simplex refinement of the chosen objective.
#pragma once

#include <utility>
#include <vector>

#include "mmadoa/angles.hpp"
#include "mmadoa/pattern.hpp"
#include "mmadoa/signal.hpp"

namespace mmadoa {

enum class Objective { ML, Simplified };

struct AngleInterval {
  double lo = 0.0;
  double hi = 0.0;  // radians, inclusive
};

struct FieldOfView {
  std::vector<AngleInterval> theta;  // one or more intervals
  AngleInterval phi{0.0, 2.0 * kPi}; // 3D only

  static FieldOfView full(const BasisSpec& spec);
};

struct EstimatorConfig {
  Objective objective = Objective::ML;
  FieldOfView fov;                 // empty theta list means the full manifold
  double coarse_grid_step = 0.0;   // radians; 0 selects 1 deg (2D) or 4 deg (3D)
  double refine_tol = 1e-8;        // relative objective-spread stopping tolerance
  int max_refine_iters = 400;
};

struct Estimate {
  SignalParams params_hat;
  double objective_value = 0.0;
  bool converged = false;
  bool floor_active = false;  // gain floor touched during optimization
};

// Gaussian-approximation log-likelihood of the measurement (gains floored).
double log_likelihood(const PowerMeasurement& meas, const SignalParams& params,
                      const PatternModel& model);

// Precomputes coarse-grid gains once so repeated estimation against the same
// model and configuration stays cheap; safe for concurrent estimate() calls.
class EstimationContext {
 public:
  EstimationContext(const PatternModel& model, const EstimatorConfig& config);

  Estimate estimate(const PowerMeasurement& meas) const;
  const PatternModel& model() const { return model_; }
  const EstimatorConfig& config() const { return config_; }

 private:
  PatternModel model_;
  EstimatorConfig config_;
  std::vector<double> grid_theta_, grid_phi_;
  std::vector<int> grid_interval_;  // index into config_.fov.theta
  Eigen::MatrixXd grid_gains_;      // one row per grid direction
  std::vector<char> grid_floor_;
};

Estimate ml_estimate(const PowerMeasurement& meas, const PatternModel& model,
                     const EstimatorConfig& config);
Estimate simplified_estimate(const PowerMeasurement& meas, const PatternModel& model,
                             const EstimatorConfig& config);

struct ProfilePoint {
  double theta = 0.0;
  double phi = 0.0;
  double objective = 0.0;  // minimized over (Ps, sigma^2) at this direction
};

std::vector<ProfilePoint> profile_objective(
    const PowerMeasurement& meas, const PatternModel& model, const EstimatorConfig& config,
    const std::vector<std::pair<double, double>>& angle_grid);

// Strict local minima lying below global minimum + depth; `circular` joins the
// profile ends (full-circle grids).
int count_local_minima(const std::vector<ProfilePoint>& profile, double depth, bool circular);

}  // namespace mmadoa
