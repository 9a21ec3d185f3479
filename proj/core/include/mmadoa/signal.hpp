// SPDX-License-Identifier: Apache-2.0
//
// Received-power statistics for a single incident narrowband signal: the exact
// noncentral chi-squared law of time-averaged port power, its Gaussian
// approximation moments, and reproducible measurement simulation.
#pragma once

#include <Eigen/Dense>

#include "mmadoa/pattern.hpp"
#include "mmadoa/rng.hpp"

namespace mmadoa {

// Estimation unknowns: incident angle(s), signal power, noise variance.
struct SignalParams {
  double theta = 0.0;        // radians
  double phi = 0.0;          // radians, fixed 0 in 2D
  double signal_power = 0.0; // linear
  double noise_var = 1.0;    // linear, > 0

  void validate() const;
};

// 10*log10(Ps / sigma^2); -inf for zero signal power.
double snr_db(const SignalParams& params);

// Per-port time-averaged received power over num_snapshots samples.
struct PowerMeasurement {
  Eigen::VectorXd port_powers;
  int num_snapshots = 1;

  void validate() const;
};

// Sums num_snapshots squared-magnitude complex snapshots per port: a
// constant-envelope signal of amplitude sqrt(g_m * Ps) plus circular complex
// noise of variance sigma^2, drawn independently across ports. Consumes exactly
// 2 * num_snapshots normal draws per port.
PowerMeasurement simulate_power(const PatternModel& model, const SignalParams& params,
                                int num_snapshots, RngStream& rng);

// E[P] = g * Ps + sigma^2.
double power_mean(double gain, double signal_power, double noise_var);

// VAR[P] = (sigma^4 + 2 g Ps sigma^2) / K.
double power_var(double gain, double signal_power, double noise_var, int num_snapshots);

// Density of the time-averaged power: scaled noncentral chi-squared with 2K
// degrees of freedom and noncentrality K*g*Ps, evaluated in log space through
// the exponentially scaled Bessel function; returns 0 rather than NaN in far
// tails, and switches to the central chi-squared limit for vanishing g*Ps.
double power_pdf(double x, double gain, double signal_power, double noise_var,
                 int num_snapshots);
double power_log_pdf(double x, double gain, double signal_power, double noise_var,
                     int num_snapshots);

}  // namespace mmadoa
