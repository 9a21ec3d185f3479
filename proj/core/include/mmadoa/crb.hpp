// SPDX-License-Identifier: Apache-2.0
//
// Fisher information of the Gaussian-approximation power model and the implied
// Cramer-Rao bounds on the incident angle(s).
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "mmadoa/pattern.hpp"
#include "mmadoa/signal.hpp"

namespace mmadoa {

// Parameter order: [theta, Ps, sigma^2] in 2D, [theta, phi, Ps, sigma^2] in 3D.
struct FisherInfo {
  Eigen::MatrixXd matrix;
  double crb_theta = 0.0;               // radians^2; +inf when theta is unidentifiable
  std::optional<double> crb_phi;        // absent in 2D
  double condition = 0.0;
  bool pseudo_inverse = false;          // condition exceeded the inversion gate
  bool floor_active = false;            // gain floor active at this direction
};

// Assembles the information matrix from closed-form partial derivatives of the
// power mean and variance (floored gains, raw analytic gradients), then inverts;
// near-singular matrices fall back to a flagged pseudo-inverse, and parameters
// with null-space overlap report an infinite bound.
FisherInfo fisher_information(const PatternModel& model, const SignalParams& params,
                              int num_snapshots);

struct CrbPoint {
  double theta = 0.0;
  double phi = 0.0;
  double crb_theta = 0.0;
  std::optional<double> crb_phi;
  bool pseudo_inverse = false;
  bool floor_active = false;
};

// fisher_information over an angle grid, bounds in radians^2.
std::vector<CrbPoint> crb_sweep(const PatternModel& model, double signal_power,
                                double noise_var, int num_snapshots,
                                const std::vector<std::pair<double, double>>& angle_grid);

}  // namespace mmadoa
