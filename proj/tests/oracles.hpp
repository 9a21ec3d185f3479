// SPDX-License-Identifier: Apache-2.0
//
// Test-only reference implementations kept independent of the library code
// paths they check: finite differences, Gauss-Legendre quadrature, closed-form
// Legendre polynomials, adaptive integration, and goodness-of-fit statistics.
#pragma once

#include <gsl/gsl_cdf.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracles {

inline double central_diff(const std::function<double(double)>& f, double x,
                           double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline bool close_rel(double a, double b, double rtol, double floor = 1e-9) {
  return std::abs(a - b) <= rtol * std::max({std::abs(a), std::abs(b), floor});
}

// max_i |a_i - b_i| / max_i |a_i| with an absolute floor
inline double vec_rel_err(const std::vector<double>& a, const std::vector<double>& b,
                          double floor = 1e-9) {
  double scale = floor, err = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
  return err / scale;
}

struct GaussLegendre {
  std::vector<double> x, w;
  GaussLegendre(int n, double a, double b) : x(n), w(n) {
    gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(n);
    for (int i = 0; i < n; ++i)
      gsl_integration_glfixed_point(a, b, i, &x[i], &w[i], table);
    gsl_integration_glfixed_table_free(table);
  }
};

namespace detail {
inline double trampoline(double x, void* params) {
  return (*static_cast<std::function<double(double)>*>(params))(x);
}
}  // namespace detail

// Adaptive integration over [a, inf).
inline double integrate_to_inf(const std::function<double(double)>& f, double a,
                               double epsabs = 1e-12, double epsrel = 1e-10) {
  gsl_set_error_handler_off();
  auto fn = f;
  gsl_function gf{&detail::trampoline, &fn};
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(4096);
  double result = 0.0, abserr = 0.0;
  const int status = gsl_integration_qagiu(&gf, a, epsabs, epsrel, 4096, ws, &result, &abserr);
  gsl_integration_workspace_free(ws);
  if (status != GSL_SUCCESS && status != GSL_EROUND)
    throw std::runtime_error("quadrature failed");
  return result;
}

// Adaptive integration over [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double epsabs = 1e-12, double epsrel = 1e-10) {
  gsl_set_error_handler_off();
  auto fn = f;
  gsl_function gf{&detail::trampoline, &fn};
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(4096);
  double result = 0.0, abserr = 0.0;
  const int status =
      gsl_integration_qags(&gf, a, b, epsabs, epsrel, 4096, ws, &result, &abserr);
  gsl_integration_workspace_free(ws);
  if (status != GSL_SUCCESS && status != GSL_EROUND)
    throw std::runtime_error("quadrature failed");
  return result;
}

// Associated Legendre polynomials with the Condon-Shortley phase, hand-written
// closed forms for degree <= 4.
inline double legendre_closed_form(int l, int m, double x) {
  const double s = std::sqrt(1.0 - x * x);
  switch (l * 10 + m) {
    case 0: return 1.0;
    case 10: return x;
    case 11: return -s;
    case 20: return 0.5 * (3.0 * x * x - 1.0);
    case 21: return -3.0 * x * s;
    case 22: return 3.0 * (1.0 - x * x);
    case 30: return 0.5 * (5.0 * x * x * x - 3.0 * x);
    case 31: return -1.5 * (5.0 * x * x - 1.0) * s;
    case 32: return 15.0 * x * (1.0 - x * x);
    case 33: return -15.0 * s * s * s;
    case 40: return 0.125 * (35.0 * x * x * x * x - 30.0 * x * x + 3.0);
    case 41: return -2.5 * (7.0 * x * x * x - 3.0 * x) * s;
    case 42: return 7.5 * (7.0 * x * x - 1.0) * (1.0 - x * x);
    case 43: return -105.0 * x * s * s * s;
    case 44: return 105.0 * (1.0 - x * x) * (1.0 - x * x);
    default: throw std::runtime_error("no closed form");
  }
}

inline double chisq_sf(double stat, int dof) { return gsl_cdf_chisq_Q(stat, dof); }
inline double normal_cdf(double z) { return gsl_cdf_ugaussian_P(z); }

// Kolmogorov-Smirnov distance between a sample and a reference CDF.
inline double ks_distance(std::vector<double> sample,
                          const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double c = cdf(sample[i]);
    d = std::max(d, std::abs(c - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - c));
  }
  return d;
}

}  // namespace oracles
