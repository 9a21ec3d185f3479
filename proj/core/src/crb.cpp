// SPDX-License-Identifier: Apache-2.0
#include "mmadoa/crb.hpp"

#include <cmath>
#include <limits>

#include "mmadoa/errors.hpp"

namespace mmadoa {

namespace {
constexpr double kConditionGate = 1e12;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

FisherInfo fisher_information(const PatternModel& model, const SignalParams& params,
                              int num_snapshots) {
  params.validate();
  if (num_snapshots < 1) throw ValidationError("snapshot count must be >= 1");

  const bool three_d = !model.is_2d();
  const int dim = three_d ? 4 : 3;
  const double ps = params.signal_power;
  const double s2 = params.noise_var;
  const double k = num_snapshots;

  const GainEval ge = eval_pattern(model, params.theta, params.phi);
  const GainGradient gg = eval_pattern_grad(model, params.theta, params.phi);

  FisherInfo info;
  info.floor_active = ge.floor_active || gg.floor_active;
  info.matrix = Eigen::MatrixXd::Zero(dim, dim);

  Eigen::VectorXd dmu(dim), dvar(dim);
  for (int m = 0; m < model.num_ports(); ++m) {
    const double g = ge.gains[m];
    const double gt = gg.d_theta[m];
    const double gp = gg.d_phi[m];
    const double var = (s2 * s2 + 2.0 * g * ps * s2) / k;

    int i = 0;
    dmu[i] = ps * gt;
    dvar[i] = 2.0 * ps * s2 * gt / k;
    ++i;
    if (three_d) {
      dmu[i] = ps * gp;
      dvar[i] = 2.0 * ps * s2 * gp / k;
      ++i;
    }
    dmu[i] = g;
    dvar[i] = 2.0 * g * s2 / k;
    ++i;
    dmu[i] = 1.0;
    dvar[i] = (2.0 * s2 + 2.0 * g * ps) / k;

    info.matrix += dmu * dmu.transpose() / var +
                   dvar * dvar.transpose() / (2.0 * var * var);
  }
  if (!info.matrix.allFinite())
    throw ValidationError("Fisher information has non-finite entries");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info.matrix);
  const Eigen::VectorXd& evals = eig.eigenvalues();  // ascending
  const Eigen::MatrixXd& evecs = eig.eigenvectors();
  const double emax = evals[dim - 1];
  if (!(emax > 0.0)) throw ValidationError("Fisher information is identically zero");

  const double emin = evals[0];
  info.condition = emin > 0.0 ? emax / emin : kInf;
  info.pseudo_inverse = !(info.condition <= kConditionGate);
  const double cut = emax * 1e-12;

  // diag of the (pseudo-)inverse; a parameter overlapping the null space has an
  // unbounded variance.
  auto inv_diag = [&](int i) {
    double null_mass = 0.0, value = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double v = evecs(i, j);
      if (evals[j] <= cut)
        null_mass += v * v;
      else
        value += v * v / evals[j];
    }
    return null_mass > 1e-8 ? kInf : value;
  };

  info.crb_theta = inv_diag(0);
  if (three_d) info.crb_phi = inv_diag(1);
  return info;
}

std::vector<CrbPoint> crb_sweep(const PatternModel& model, double signal_power,
                                double noise_var, int num_snapshots,
                                const std::vector<std::pair<double, double>>& angle_grid) {
  std::vector<CrbPoint> out;
  out.reserve(angle_grid.size());
  for (const auto& [theta, phi] : angle_grid) {
    SignalParams params{theta, phi, signal_power, noise_var};
    const FisherInfo info = fisher_information(model, params, num_snapshots);
    out.push_back(
        {theta, phi, info.crb_theta, info.crb_phi, info.pseudo_inverse, info.floor_active});
  }
  return out;
}

}  // namespace mmadoa
