// SPDX-License-Identifier: Apache-2.0
//
// Multi-port antenna power patterns: least-squares fitting of a sampling matrix
// against an angular basis, evaluation and differentiation of the interpolated
// pattern, peak normalization, synthetic pattern generation, and file I/O.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "mmadoa/basis.hpp"

namespace mmadoa {

// Calibration-grid samples of per-port power gain at known directions.
struct PatternSamples {
  Eigen::VectorXd thetas;  // radians
  Eigen::VectorXd phis;    // radians, all zero for 2D data
  Eigen::MatrixXd gains;   // one row per direction, one column per port

  int size() const { return static_cast<int>(thetas.size()); }
  int num_ports() const { return static_cast<int>(gains.cols()); }
  void validate() const;  // nonempty, consistent shapes, finite, gains >= 0
};

// Interpolated evaluations are clamped at this floor so downstream variances
// stay strictly positive where a truncated expansion dips toward zero.
inline constexpr double kGainFloor = 1e-9;

// g(theta, phi) = Re(G * Psi(theta, phi)) / normalization_scale. The matrix is
// complex with conjugate-symmetric columns in 2D and purely real in 3D.
class PatternModel {
 public:
  PatternModel(BasisSpec spec, Eigen::MatrixXcd sampling_matrix, double scale = 1.0);

  const BasisSpec& basis() const { return spec_; }
  const Eigen::MatrixXcd& sampling_matrix() const { return coeff_; }
  double normalization_scale() const { return scale_; }
  int num_ports() const { return static_cast<int>(coeff_.rows()); }
  bool is_2d() const { return spec_.dimension == Dimension::TwoD; }

  // Real view of the 3D coefficient matrix (cached at construction).
  const Eigen::MatrixXd& real_coeffs() const { return real_coeff_; }

 private:
  BasisSpec spec_;
  Eigen::MatrixXcd coeff_;
  Eigen::MatrixXd real_coeff_;
  double scale_;
};

struct GainEval {
  Eigen::VectorXd gains;  // per port, clamped at kGainFloor
  bool floor_active;
};

struct GainGradient {
  Eigen::VectorXd d_theta;  // per port, unclamped
  Eigen::VectorXd d_phi;    // identically zero in 2D
  bool floor_active;        // the clamp was active at this direction
};

struct FitOptions {
  double max_condition = 1e12;
  // Refit at the smallest order whose per-degree tail energy falls below
  // truncate_rel_energy of the total.
  bool auto_truncate = false;
  double truncate_rel_energy = 1e-6;
};

struct FitResult {
  PatternModel model;         // unnormalized (scale = 1)
  double residual_rms;        // RMS misfit over all samples and ports
  double condition;           // design-matrix condition number
  double symmetry_projection; // 2D: Frobenius distance moved by symmetrization
};

// Least-squares fit of the sampling matrix via singular value decomposition.
// Throws on underdetermined systems and on condition numbers past the gate.
FitResult fit_sampling_matrix(const PatternSamples& samples, const BasisSpec& spec,
                              const FitOptions& options = {});

Eigen::VectorXd eval_pattern_raw(const PatternModel& model, double theta, double phi = 0.0);
GainEval eval_pattern(const PatternModel& model, double theta, double phi = 0.0);
GainGradient eval_pattern_grad(const PatternModel& model, double theta, double phi = 0.0);

// Rescales so the grid maximum over ports is 1 (1 deg grid; 3D co-elevation
// clamped away from the poles). Fails on patterns without a positive maximum.
PatternModel normalize_pattern(const PatternModel& model);

// Coefficient energy of the stored sampling matrix summed over ports, grouped
// by degree l (3D) or |n| (2D); a truncation diagnostic.
Eigen::VectorXd coefficient_energy(const PatternModel& model);
int select_truncation_order(const Eigen::VectorXd& energy, double rel_tail_energy = 1e-6);

struct SynthOptions {
  double smoothness = 0.8;   // per-degree amplitude decay exp(-smoothness * l)
  bool mirror = false;       // 2D only: enforce g(theta) == g(-theta)
  bool low_gain_band = false;  // 3D only: suppress gain toward theta = pi
  double band_floor = 0.15;
};

// Reproducible band-limited pattern: draws amplitude coefficients at an order
// that keeps the squared amplitude exactly representable in `spec`, fits the
// resulting power pattern, and peak-normalizes it.
PatternModel synth_pattern(std::uint64_t seed, int num_ports, const BasisSpec& spec,
                           const SynthOptions& options = {});

// Samples the (normalized) model on a regular grid; tiny negative round-off
// values are clamped to zero so results are valid PatternSamples.
PatternSamples sample_pattern_grid(const PatternModel& model, int n_theta, int n_phi = 1);

// CSV with header theta_rad,phi_rad,g1,...,gM.
PatternSamples load_pattern_samples(const std::string& path);
void save_pattern_samples(const std::string& path, const PatternSamples& samples);

// Versioned text format; the stored matrix absorbs the normalization scale on
// save, so loaded models always carry scale 1.
PatternModel load_pattern_model(const std::string& path);
void save_pattern_model(const std::string& path, const PatternModel& model);

}  // namespace mmadoa
