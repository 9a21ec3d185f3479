// SPDX-License-Identifier: Apache-2.0
#include "mmadoa/signal.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include <cmath>
#include <limits>
#include <string>

#include "mmadoa/errors.hpp"

namespace mmadoa {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// GSL reports range issues through return codes once the abort handler is off.
void disable_gsl_abort() {
  static const auto once = [] {
    gsl_set_error_handler_off();
    return 0;
  }();
  (void)once;
}

double log_bessel_i_scaled(double nu, double x) {
  disable_gsl_abort();
  gsl_sf_result r;
  const int status = gsl_sf_bessel_Inu_scaled_e(nu, x, &r);
  if (status == GSL_EUNDRFLW || r.val <= 0.0) return kNegInf;
  if (status != GSL_SUCCESS)
    throw std::runtime_error(std::string("Bessel evaluation failed: ") +
                             gsl_strerror(status));
  return std::log(r.val);
}

}  // namespace

void SignalParams::validate() const {
  if (!(noise_var > 0.0) || !std::isfinite(noise_var))
    throw ValidationError("noise variance must be positive");
  if (!(signal_power >= 0.0) || !std::isfinite(signal_power))
    throw ValidationError("signal power must be nonnegative");
  if (!std::isfinite(theta) || !std::isfinite(phi))
    throw ValidationError("angles must be finite");
}

double snr_db(const SignalParams& params) {
  params.validate();
  if (params.signal_power == 0.0) return kNegInf;
  return 10.0 * std::log10(params.signal_power / params.noise_var);
}

void PowerMeasurement::validate() const {
  if (port_powers.size() < 1) throw ValidationError("measurement: no ports");
  if (!port_powers.allFinite() || (port_powers.array() < 0.0).any())
    throw ValidationError("measurement: powers must be finite and nonnegative");
  if (num_snapshots < 1) throw ValidationError("measurement: snapshot count must be >= 1");
}

PowerMeasurement simulate_power(const PatternModel& model, const SignalParams& params,
                                int num_snapshots, RngStream& rng) {
  params.validate();
  if (num_snapshots < 1) throw ValidationError("snapshot count must be >= 1");

  const Eigen::VectorXd gains = eval_pattern(model, params.theta, params.phi).gains;
  const double noise_sd = std::sqrt(params.noise_var / 2.0);

  PowerMeasurement meas;
  meas.num_snapshots = num_snapshots;
  meas.port_powers.resize(gains.size());
  for (Eigen::Index m = 0; m < gains.size(); ++m) {
    const double amplitude = std::sqrt(gains[m] * params.signal_power);
    double sum = 0.0;
    for (int k = 0; k < num_snapshots; ++k) {
      const double re = amplitude + noise_sd * rng.normal();
      const double im = noise_sd * rng.normal();
      sum += re * re + im * im;
    }
    meas.port_powers[m] = sum / num_snapshots;
  }
  return meas;
}

double power_mean(double gain, double signal_power, double noise_var) {
  return gain * signal_power + noise_var;
}

double power_var(double gain, double signal_power, double noise_var, int num_snapshots) {
  return (noise_var * noise_var + 2.0 * gain * signal_power * noise_var) / num_snapshots;
}

double power_log_pdf(double x, double gain, double signal_power, double noise_var,
                     int num_snapshots) {
  if (!(noise_var > 0.0)) throw ValidationError("noise variance must be positive");
  if (!(gain >= 0.0) || !(signal_power >= 0.0))
    throw ValidationError("gain and signal power must be nonnegative");
  if (num_snapshots < 1) throw ValidationError("snapshot count must be >= 1");
  if (!std::isfinite(x) || x < 0.0) return kNegInf;

  const double k = num_snapshots;
  const double gp = gain * signal_power;
  const double lambda = k * gp;

  if (lambda < 1e-300) {
    // central chi-squared limit of the summed power
    if (x == 0.0)
      return num_snapshots == 1 ? -std::log(noise_var) : kNegInf;
    return std::log(k) + (k - 1.0) * std::log(k * x) - k * x / noise_var -
           k * std::log(noise_var) - std::lgamma(k);
  }

  if (x == 0.0 && num_snapshots > 1) return kNegInf;
  const double arg = 2.0 * k * std::sqrt(gp * x) / noise_var;
  const double log_bessel = log_bessel_i_scaled(k - 1.0, arg);
  if (log_bessel == kNegInf) return kNegInf;
  const double power_term = x == 0.0 ? 0.0 : 0.5 * (k - 1.0) * (std::log(x) - std::log(gp));
  return std::log(k) - std::log(noise_var) + power_term - k * (gp + x) / noise_var +
         log_bessel + arg;
}

double power_pdf(double x, double gain, double signal_power, double noise_var,
                 int num_snapshots) {
  const double lp = power_log_pdf(x, gain, signal_power, noise_var, num_snapshots);
  return lp == kNegInf ? 0.0 : std::exp(lp);
}

}  // namespace mmadoa
