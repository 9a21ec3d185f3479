// SPDX-License-Identifier: Apache-2.0
#include "mmadoa/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "mmadoa/angles.hpp"
#include "mmadoa/errors.hpp"

namespace mmadoa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double objective_value(Objective kind, const Eigen::VectorXd& powers,
                       const Eigen::VectorXd& gains, int num_snapshots, double ps,
                       double s2) {
  double sum = 0.0;
  for (Eigen::Index m = 0; m < powers.size(); ++m) {
    const double r = powers[m] - ps * gains[m] - s2;
    if (kind == Objective::ML) {
      const double v = s2 * s2 + 2.0 * gains[m] * ps * s2;
      sum += std::log(2.0 * kPi * v / num_snapshots) + num_snapshots * r * r / v;
    } else {
      sum += r * r / (ps * gains[m] + 2.0 * s2);
    }
  }
  return sum;
}

struct NuisanceInit {
  double ps = 0.0;
  double s2 = 0.0;
};

// Nonnegative least squares of the measurement on [gains, 1]: closed-form 2x2
// solution with active-set fallbacks.
NuisanceInit nuisance_init(const Eigen::VectorXd& gains, const Eigen::VectorXd& powers,
                           double s2_floor) {
  const double m = static_cast<double>(gains.size());
  const double sgg = gains.squaredNorm();
  const double sg = gains.sum();
  const double sgp = gains.dot(powers);
  const double sp = powers.sum();

  auto residual = [&](double ps, double s2) {
    return (powers - ps * gains - Eigen::VectorXd::Constant(powers.size(), s2)).squaredNorm();
  };

  NuisanceInit best{0.0, std::max(sp / m, s2_floor)};
  double best_res = residual(best.ps, best.s2);

  auto consider = [&](double ps, double s2) {
    ps = std::max(ps, 0.0);
    s2 = std::max(s2, s2_floor);
    const double r = residual(ps, s2);
    if (r < best_res) {
      best = {ps, s2};
      best_res = r;
    }
  };

  const double det = sgg * m - sg * sg;
  if (det > 1e-12 * std::max(sgg * m, 1.0))
    consider((sgp * m - sg * sp) / det, (sgg * sp - sg * sgp) / det);
  if (sgg > 0.0) consider((sgp - s2_floor * sg) / sgg, s2_floor);
  return best;
}

struct NmResult {
  Eigen::VectorXd x;
  double f = kInf;
  bool converged = false;
};

// Nelder-Mead with projection onto [lo, hi]; every evaluated point is feasible
// and the best point ever seen is returned, so refinement cannot worsen the
// starting value.
NmResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& fn,
                     const Eigen::VectorXd& x0, const Eigen::VectorXd& steps,
                     const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, double rel_tol,
                     int max_iters) {
  const int d = static_cast<int>(x0.size());
  auto proj = [&](Eigen::VectorXd x) {
    for (int i = 0; i < d; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
  };

  NmResult best;
  auto eval = [&](const Eigen::VectorXd& x) {
    const double f = fn(x);
    if (f < best.f) {
      best.f = f;
      best.x = x;
    }
    return f;
  };

  std::vector<Eigen::VectorXd> xs(d + 1);
  std::vector<double> fs(d + 1);
  xs[0] = proj(x0);
  fs[0] = eval(xs[0]);
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd v = xs[0];
    v[i] += steps[i];
    v = proj(v);
    if ((v - xs[0]).norm() < 1e-300) {
      v[i] -= 2.0 * steps[i];
      v = proj(v);
    }
    xs[i + 1] = v;
    fs[i + 1] = eval(v);
  }

  std::vector<int> idx(d + 1);
  for (int iter = 0; iter < max_iters; ++iter) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    const int ib = idx[0], iw = idx[d], is = idx[d - 1];
    if (fs[iw] - fs[ib] <= rel_tol * (1.0 + std::abs(fs[ib]))) {
      best.converged = true;
      return best;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i <= d; ++i)
      if (i != iw) centroid += xs[i];
    centroid /= d;

    const Eigen::VectorXd xr = proj(centroid + (centroid - xs[iw]));
    const double fr = eval(xr);
    if (fr < fs[ib]) {
      const Eigen::VectorXd xe = proj(centroid + 2.0 * (centroid - xs[iw]));
      const double fe = eval(xe);
      if (fe < fr) {
        xs[iw] = xe;
        fs[iw] = fe;
      } else {
        xs[iw] = xr;
        fs[iw] = fr;
      }
    } else if (fr < fs[is]) {
      xs[iw] = xr;
      fs[iw] = fr;
    } else {
      const Eigen::VectorXd xc = proj(centroid + 0.5 * (xs[iw] - centroid));
      const double fc = eval(xc);
      if (fc < fs[iw]) {
        xs[iw] = xc;
        fs[iw] = fc;
      } else {
        for (int i = 0; i <= d; ++i) {
          if (i == ib) continue;
          xs[i] = proj(xs[ib] + 0.5 * (xs[i] - xs[ib]));
          fs[i] = eval(xs[i]);
        }
      }
    }
  }
  return best;
}

std::vector<double> interval_points(const AngleInterval& iv, double step, bool circular) {
  std::vector<double> pts;
  if (circular) {
    const int n = std::max(1, static_cast<int>(std::round((iv.hi - iv.lo) / step)));
    for (int i = 0; i < n; ++i) pts.push_back(iv.lo + (iv.hi - iv.lo) * i / n);
    return pts;
  }
  for (double t = iv.lo; t <= iv.hi + 1e-12; t += step) pts.push_back(std::min(t, iv.hi));
  if (pts.empty() || pts.back() < iv.hi - 1e-9) pts.push_back(iv.hi);
  return pts;
}

}  // namespace

FieldOfView FieldOfView::full(const BasisSpec& spec) {
  FieldOfView fov;
  if (spec.dimension == Dimension::TwoD) {
    fov.theta = {{-kPi, kPi}};
  } else {
    fov.theta = {{kPoleGuard, kPi - kPoleGuard}};
    fov.phi = {0.0, 2.0 * kPi};
  }
  return fov;
}

double log_likelihood(const PowerMeasurement& meas, const SignalParams& params,
                      const PatternModel& model) {
  meas.validate();
  params.validate();
  if (meas.port_powers.size() != model.num_ports())
    throw ValidationError("measurement port count does not match model");
  const Eigen::VectorXd gains = eval_pattern(model, params.theta, params.phi).gains;
  double ll = 0.0;
  for (Eigen::Index m = 0; m < gains.size(); ++m) {
    const double mu = power_mean(gains[m], params.signal_power, params.noise_var);
    const double var =
        power_var(gains[m], params.signal_power, params.noise_var, meas.num_snapshots);
    const double r = meas.port_powers[m] - mu;
    ll += -0.5 * std::log(2.0 * kPi * var) - r * r / (2.0 * var);
  }
  return ll;
}

EstimationContext::EstimationContext(const PatternModel& model, const EstimatorConfig& config)
    : model_(model), config_(config) {
  const bool three_d = !model_.is_2d();
  if (config_.fov.theta.empty()) config_.fov = FieldOfView::full(model_.basis());
  if (!(config_.refine_tol > 0.0)) throw ValidationError("refine_tol must be positive");
  if (config_.coarse_grid_step < 0.0)
    throw ValidationError("coarse grid step must be nonnegative");
  const double step =
      config_.coarse_grid_step > 0.0 ? config_.coarse_grid_step : deg2rad(three_d ? 4.0 : 1.0);

  auto& intervals = config_.fov.theta;
  std::sort(intervals.begin(), intervals.end(),
            [](const AngleInterval& a, const AngleInterval& b) { return a.lo < b.lo; });
  for (auto& iv : intervals) {
    if (!(iv.lo <= iv.hi)) throw ValidationError("field of view interval has lo > hi");
    if (three_d) {
      iv.lo = std::clamp(iv.lo, kPoleGuard, kPi - kPoleGuard);
      iv.hi = std::clamp(iv.hi, kPoleGuard, kPi - kPoleGuard);
    }
  }

  std::vector<double> phis{0.0};
  if (three_d) {
    auto& piv = config_.fov.phi;
    if (!(piv.lo <= piv.hi)) throw ValidationError("azimuth field of view has lo > hi");
    const bool phi_circular = piv.hi - piv.lo >= 2.0 * kPi - 1e-9;
    phis = interval_points(piv, step, phi_circular);
  }

  for (int k = 0; k < static_cast<int>(intervals.size()); ++k) {
    const bool circular =
        !three_d && intervals[k].hi - intervals[k].lo >= 2.0 * kPi - 1e-9;
    for (double theta : interval_points(intervals[k], step, circular)) {
      for (double phi : phis) {
        grid_theta_.push_back(theta);
        grid_phi_.push_back(phi);
        grid_interval_.push_back(k);
      }
    }
  }
  if (grid_theta_.empty()) throw ValidationError("field of view contains no grid points");

  grid_gains_.resize(static_cast<Eigen::Index>(grid_theta_.size()), model_.num_ports());
  grid_floor_.resize(grid_theta_.size());
  for (std::size_t i = 0; i < grid_theta_.size(); ++i) {
    const GainEval ge = eval_pattern(model_, grid_theta_[i], grid_phi_[i]);
    grid_gains_.row(static_cast<Eigen::Index>(i)) = ge.gains.transpose();
    grid_floor_[i] = ge.floor_active ? 1 : 0;
  }
}

Estimate EstimationContext::estimate(const PowerMeasurement& meas) const {
  meas.validate();
  const bool three_d = !model_.is_2d();
  const int m = model_.num_ports();
  if (meas.port_powers.size() != m)
    throw ValidationError("measurement port count does not match model");
  const int unknowns = three_d ? 4 : 3;
  if (m < unknowns)
    throw ValidationError("need at least " + std::to_string(unknowns) +
                          " ports to identify " + std::to_string(unknowns) + " unknowns");

  const Eigen::VectorXd& powers = meas.port_powers;
  const int k = meas.num_snapshots;
  const double s2_floor = 1e-12 * std::max(powers.maxCoeff(), 1e-300);

  // stage 1: coarse grid; strict improvement keeps the smallest angle on ties
  int best_idx = -1;
  double best_f = kInf;
  NuisanceInit best_init;
  for (std::size_t i = 0; i < grid_theta_.size(); ++i) {
    const Eigen::VectorXd gains = grid_gains_.row(static_cast<Eigen::Index>(i)).transpose();
    const NuisanceInit init = nuisance_init(gains, powers, s2_floor);
    const double f = objective_value(config_.objective, powers, gains, k, init.ps, init.s2);
    if (f < best_f) {
      best_f = f;
      best_idx = static_cast<int>(i);
      best_init = init;
    }
  }
  if (best_idx < 0) throw ValidationError("objective is non-finite over the whole grid");

  // stage 2: joint simplex refinement from the best grid point
  bool floor_touched = grid_floor_[best_idx] != 0;
  const AngleInterval& tiv = config_.fov.theta[grid_interval_[best_idx]];
  const double step = config_.coarse_grid_step > 0.0 ? config_.coarse_grid_step
                                                     : deg2rad(three_d ? 4.0 : 1.0);
  const int d = three_d ? 4 : 3;
  Eigen::VectorXd x0(d), steps(d), lo(d), hi(d);
  int p = 0;
  x0[p] = grid_theta_[best_idx];
  steps[p] = std::min(step / 2.0, (tiv.hi - tiv.lo) / 2.0);
  lo[p] = tiv.lo;
  hi[p] = tiv.hi;
  ++p;
  if (three_d) {
    x0[p] = grid_phi_[best_idx];
    steps[p] = std::min(step / 2.0, (config_.fov.phi.hi - config_.fov.phi.lo) / 2.0);
    lo[p] = config_.fov.phi.lo;
    hi[p] = config_.fov.phi.hi;
    ++p;
  }
  const double scale = std::max(powers.maxCoeff(), 1e-300);
  x0[p] = best_init.ps;
  steps[p] = 0.2 * best_init.ps + 0.05 * scale;
  lo[p] = 0.0;
  hi[p] = kInf;
  ++p;
  x0[p] = best_init.s2;
  steps[p] = 0.2 * best_init.s2 + 0.01 * scale;
  lo[p] = s2_floor;
  hi[p] = kInf;

  auto fn = [&](const Eigen::VectorXd& x) {
    const double theta = x[0];
    const double phi = three_d ? x[1] : 0.0;
    const GainEval ge = eval_pattern(model_, theta, phi);
    floor_touched = floor_touched || ge.floor_active;
    return objective_value(config_.objective, powers, ge.gains, k, x[d - 2], x[d - 1]);
  };
  const NmResult nm =
      nelder_mead(fn, x0, steps, lo, hi, config_.refine_tol, config_.max_refine_iters);

  Estimate est;
  est.params_hat.theta = nm.x[0];
  est.params_hat.phi = three_d ? nm.x[1] : 0.0;
  est.params_hat.signal_power = nm.x[d - 2];
  est.params_hat.noise_var = nm.x[d - 1];
  est.objective_value = nm.f;
  est.converged = nm.converged;
  est.floor_active = floor_touched;
  return est;
}

Estimate ml_estimate(const PowerMeasurement& meas, const PatternModel& model,
                     const EstimatorConfig& config) {
  EstimatorConfig cfg = config;
  cfg.objective = Objective::ML;
  return EstimationContext(model, cfg).estimate(meas);
}

Estimate simplified_estimate(const PowerMeasurement& meas, const PatternModel& model,
                             const EstimatorConfig& config) {
  EstimatorConfig cfg = config;
  cfg.objective = Objective::Simplified;
  return EstimationContext(model, cfg).estimate(meas);
}

std::vector<ProfilePoint> profile_objective(
    const PowerMeasurement& meas, const PatternModel& model, const EstimatorConfig& config,
    const std::vector<std::pair<double, double>>& angle_grid) {
  meas.validate();
  if (angle_grid.empty()) throw ValidationError("profile grid is empty");
  const Eigen::VectorXd& powers = meas.port_powers;
  const int k = meas.num_snapshots;
  const double s2_floor = 1e-12 * std::max(powers.maxCoeff(), 1e-300);
  const double scale = std::max(powers.maxCoeff(), 1e-300);

  std::vector<ProfilePoint> profile;
  profile.reserve(angle_grid.size());
  for (const auto& [theta, phi] : angle_grid) {
    const Eigen::VectorXd gains = eval_pattern(model, theta, phi).gains;
    const NuisanceInit init = nuisance_init(gains, powers, s2_floor);
    auto fn = [&](const Eigen::VectorXd& x) {
      return objective_value(config.objective, powers, gains, k, x[0], x[1]);
    };
    Eigen::VectorXd x0(2), steps(2), lo(2), hi(2);
    x0 << init.ps, init.s2;
    steps << 0.2 * init.ps + 0.05 * scale, 0.2 * init.s2 + 0.01 * scale;
    lo << 0.0, s2_floor;
    hi << kInf, kInf;
    const NmResult nm =
        nelder_mead(fn, x0, steps, lo, hi, config.refine_tol, config.max_refine_iters);
    profile.push_back({theta, phi, nm.f});
  }
  return profile;
}

int count_local_minima(const std::vector<ProfilePoint>& profile, double depth,
                       bool circular) {
  const int n = static_cast<int>(profile.size());
  if (n < 3) return 0;
  double global = kInf;
  for (const auto& pt : profile) global = std::min(global, pt.objective);
  int count = 0;
  for (int i = 0; i < n; ++i) {
    if (!circular && (i == 0 || i == n - 1)) continue;
    const double prev = profile[(i + n - 1) % n].objective;
    const double next = profile[(i + 1) % n].objective;
    const double v = profile[i].objective;
    if (v < prev && v < next && v <= global + depth) ++count;
  }
  return count;
}

}  // namespace mmadoa
