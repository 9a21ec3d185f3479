// SPDX-License-Identifier: Apache-2.0
#include "mmadoa/basis.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mmadoa/angles.hpp"
#include "mmadoa/errors.hpp"

namespace mmadoa {

namespace {

constexpr int kMaxDegree = 64;  // recurrence headroom; (2*64-1)!! is still finite in double

constexpr double kInvSqrt2Pi = 0.39894228040143267794;  // 1/sqrt(2*pi)

void check_degree_order(int l, int m_abs) {
  if (l < 0 || l > kMaxDegree)
    throw ValidationError("spherical-harmonic degree out of range: l=" + std::to_string(l));
  if (m_abs > l)
    throw ValidationError("spherical-harmonic order exceeds degree: |m|=" +
                          std::to_string(m_abs) + " > l=" + std::to_string(l));
}

void check_theta_3d(double theta) {
  if (!(theta >= 0.0 && theta <= kPi))
    throw ValidationError("co-elevation must lie in [0, pi], got " + std::to_string(theta));
}

double check_interior_theta(double theta) {
  check_theta_3d(theta);
  const double s = std::sin(theta);
  if (theta <= 0.0 || theta >= kPi || s < 1e-12)
    throw ValidationError("angular derivative is undefined at the poles (theta=" +
                          std::to_string(theta) + ")");
  return s;
}

// P_l^m for all 0 <= m <= l <= lmax at fixed x, triangular layout l*(l+1)/2 + m.
// Seed P_m^m = (-1)^m (2m-1)!! (1-x^2)^{m/2}, then upward in l:
//   (l-m) P_l^m = (2l-1) x P_{l-1}^m - (l+m-1) P_{l-2}^m.
std::vector<double> legendre_table(int lmax, double x) {
  std::vector<double> p((lmax + 1) * (lmax + 2) / 2);
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  auto at = [&p](int l, int m) -> double& { return p[l * (l + 1) / 2 + m]; };

  at(0, 0) = 1.0;
  for (int m = 1; m <= lmax; ++m) at(m, m) = -(2.0 * m - 1.0) * s * at(m - 1, m - 1);
  for (int m = 0; m < lmax; ++m) {
    at(m + 1, m) = (2.0 * m + 1.0) * x * at(m, m);
    for (int l = m + 2; l <= lmax; ++l)
      at(l, m) = ((2.0 * l - 1.0) * x * at(l - 1, m) - (l + m - 1.0) * at(l - 2, m)) / (l - m);
  }
  return p;
}

// Orthonormalization factor sqrt((2l+1)/(4*pi) * (l-m)!/(l+m)!).
double sph_norm(int l, int m) {
  double ratio = 1.0;
  for (int k = l - m + 1; k <= l + m; ++k) ratio /= k;
  return std::sqrt((2.0 * l + 1.0) / (4.0 * kPi) * ratio);
}

// Case split shared by value/derivative assembly: azimuthal factor and the
// matching sqrt(2)-scaled normalization.
double azimuth_factor(int m, double phi) {
  if (m > 0) return std::sqrt(2.0) * std::cos(m * phi);
  if (m == 0) return 1.0;
  return std::sqrt(2.0) * std::sin(-m * phi);
}

double azimuth_factor_dphi(int m, double phi) {
  if (m > 0) return std::sqrt(2.0) * (-m) * std::sin(m * phi);
  if (m == 0) return 0.0;
  return std::sqrt(2.0) * (-m) * std::cos(m * phi);
}

// d/dtheta P_l^m(cos theta) from the table (needs degree l+1):
//   (1+l-m)/sin(theta) * P_{l+1}^m - (l+1)/tan(theta) * P_l^m.
double legendre_dtheta(const std::vector<double>& table, int l, int m, double theta,
                       double sin_theta) {
  auto at = [&table](int li, int mi) { return table[li * (li + 1) / 2 + mi]; };
  const double cot = std::cos(theta) / sin_theta;
  return (1.0 + l - m) / sin_theta * at(l + 1, m) - (l + 1.0) * cot * at(l, m);
}

}  // namespace

BasisSpec BasisSpec::two_d(int max_fourier_order) {
  if (max_fourier_order < 0) throw ValidationError("Fourier order must be nonnegative");
  return BasisSpec{Dimension::TwoD, max_fourier_order};
}

BasisSpec BasisSpec::three_d(int max_degree) {
  if (max_degree < 0 || max_degree > kMaxDegree)
    throw ValidationError("spherical-harmonic degree must lie in [0, " +
                          std::to_string(kMaxDegree) + "]");
  return BasisSpec{Dimension::ThreeD, max_degree};
}

bool operator==(const BasisSpec& a, const BasisSpec& b) {
  return a.dimension == b.dimension && a.order == b.order;
}

int sph_index(int l, int m) {
  check_degree_order(l, std::abs(m));
  return (l + 1) * l + m;
}

std::pair<int, int> sph_degree_order(int n) {
  if (n < 0) throw ValidationError("flat spherical-harmonic index must be nonnegative");
  const int l = static_cast<int>(std::sqrt(static_cast<double>(n)));
  return {l, n - (l + 1) * l};
}

Eigen::VectorXcd fourier_basis(double theta, int max_order) {
  if (max_order < 0) throw ValidationError("Fourier order must be nonnegative");
  Eigen::VectorXcd v(2 * max_order + 1);
  for (int n = -max_order; n <= max_order; ++n)
    v[n + max_order] = std::polar(kInvSqrt2Pi, n * theta);
  return v;
}

Eigen::VectorXcd fourier_basis_dtheta(double theta, int max_order) {
  Eigen::VectorXcd v = fourier_basis(theta, max_order);
  for (int n = -max_order; n <= max_order; ++n)
    v[n + max_order] *= std::complex<double>(0.0, static_cast<double>(n));
  return v;
}

double assoc_legendre(int l, int m, double x) {
  if (m < 0) throw ValidationError("assoc_legendre requires m >= 0");
  check_degree_order(l, m);
  if (!(std::abs(x) <= 1.0))
    throw ValidationError("assoc_legendre argument must lie in [-1, 1]");
  return legendre_table(l, x)[l * (l + 1) / 2 + m];
}

double assoc_legendre_dtheta(int l, int m, double theta) {
  if (m < 0) throw ValidationError("assoc_legendre_dtheta requires m >= 0");
  check_degree_order(l, m);
  const double s = check_interior_theta(theta);
  const auto table = legendre_table(l + 1, std::cos(theta));
  return legendre_dtheta(table, l, m, theta, s);
}

double sph_harmonic(int l, int m, double theta, double phi) {
  const int ma = std::abs(m);
  check_degree_order(l, ma);
  check_theta_3d(theta);
  const double p = legendre_table(l, std::cos(theta))[l * (l + 1) / 2 + ma];
  return sph_norm(l, ma) * azimuth_factor(m, phi) * p;
}

double sph_harmonic_dtheta(int l, int m, double theta, double phi) {
  const int ma = std::abs(m);
  check_degree_order(l, ma);
  const double s = check_interior_theta(theta);
  const auto table = legendre_table(l + 1, std::cos(theta));
  return sph_norm(l, ma) * azimuth_factor(m, phi) * legendre_dtheta(table, l, ma, theta, s);
}

double sph_harmonic_dphi(int l, int m, double theta, double phi) {
  const int ma = std::abs(m);
  check_degree_order(l, ma);
  check_theta_3d(theta);
  if (m == 0) return 0.0;
  const double p = legendre_table(l, std::cos(theta))[l * (l + 1) / 2 + ma];
  return sph_norm(l, ma) * azimuth_factor_dphi(m, phi) * p;
}

Eigen::VectorXd sph_basis(int max_degree, double theta, double phi) {
  check_degree_order(max_degree, 0);
  check_theta_3d(theta);
  const auto table = legendre_table(max_degree, std::cos(theta));
  Eigen::VectorXd v((max_degree + 1) * (max_degree + 1));
  for (int l = 0; l <= max_degree; ++l) {
    for (int m = -l; m <= l; ++m) {
      const int ma = std::abs(m);
      v[(l + 1) * l + m] =
          sph_norm(l, ma) * azimuth_factor(m, phi) * table[l * (l + 1) / 2 + ma];
    }
  }
  return v;
}

Eigen::VectorXd sph_basis_dtheta(int max_degree, double theta, double phi) {
  check_degree_order(max_degree, 0);
  const double s = check_interior_theta(theta);
  const auto table = legendre_table(max_degree + 1, std::cos(theta));
  Eigen::VectorXd v((max_degree + 1) * (max_degree + 1));
  for (int l = 0; l <= max_degree; ++l) {
    for (int m = -l; m <= l; ++m) {
      const int ma = std::abs(m);
      v[(l + 1) * l + m] =
          sph_norm(l, ma) * azimuth_factor(m, phi) * legendre_dtheta(table, l, ma, theta, s);
    }
  }
  return v;
}

Eigen::VectorXd sph_basis_dphi(int max_degree, double theta, double phi) {
  check_degree_order(max_degree, 0);
  check_theta_3d(theta);
  const auto table = legendre_table(max_degree, std::cos(theta));
  Eigen::VectorXd v((max_degree + 1) * (max_degree + 1));
  for (int l = 0; l <= max_degree; ++l) {
    for (int m = -l; m <= l; ++m) {
      const int ma = std::abs(m);
      v[(l + 1) * l + m] =
          sph_norm(l, ma) * azimuth_factor_dphi(m, phi) * table[l * (l + 1) / 2 + ma];
    }
  }
  return v;
}

BasisVector basis_vector(const BasisSpec& spec, double theta, double phi) {
  BasisVector out;
  if (spec.dimension == Dimension::TwoD) {
    out.values = fourier_basis(theta, spec.order);
  } else {
    out.values = sph_basis(spec.order, theta, phi).cast<std::complex<double>>();
  }
  return out;
}

BasisGradient basis_gradient(const BasisSpec& spec, double theta, double phi) {
  BasisGradient out;
  if (spec.dimension == Dimension::TwoD) {
    out.d_theta = fourier_basis_dtheta(theta, spec.order);
    out.d_phi = Eigen::VectorXcd::Zero(spec.length());
  } else {
    out.d_theta = sph_basis_dtheta(spec.order, theta, phi).cast<std::complex<double>>();
    out.d_phi = sph_basis_dphi(spec.order, theta, phi).cast<std::complex<double>>();
  }
  return out;
}

}  // namespace mmadoa
