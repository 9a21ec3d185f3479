// SPDX-License-Identifier: Apache-2.0
//
// Angular basis functions for pattern interpolation: complex Fourier basis on the
// circle (2D, one angle) and real spherical harmonics on the sphere (3D, two
// angles), together with their analytic angular derivatives.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>

namespace mmadoa {

enum class Dimension { TwoD, ThreeD };

// 2D: max Fourier order N, vector length 2N+1, flat index n+N for n in [-N, N].
// 3D: max degree L, vector length (L+1)^2, flat index (l+1)l+m.
struct BasisSpec {
  Dimension dimension = Dimension::TwoD;
  int order = 0;

  int length() const {
    return dimension == Dimension::TwoD ? 2 * order + 1 : (order + 1) * (order + 1);
  }
  static BasisSpec two_d(int max_fourier_order);
  static BasisSpec three_d(int max_degree);
};

bool operator==(const BasisSpec& a, const BasisSpec& b);

// Flat enumeration of spherical-harmonic (degree, order) pairs.
int sph_index(int l, int m);
std::pair<int, int> sph_degree_order(int n);

// Basis values in enumeration order. 3D entries carry an exactly zero imaginary
// part; 2D entries satisfy value(-n) == conj(value(n)) for real angles.
struct BasisVector {
  Eigen::VectorXcd values;
};

struct BasisGradient {
  Eigen::VectorXcd d_theta;
  Eigen::VectorXcd d_phi;  // all-zero in 2D
};

// (1/sqrt(2*pi)) * exp(j*n*theta) for n = -N..N.
Eigen::VectorXcd fourier_basis(double theta, int max_order);
// Entrywise derivative (j*n/sqrt(2*pi)) * exp(j*n*theta).
Eigen::VectorXcd fourier_basis_dtheta(double theta, int max_order);

// Associated Legendre P_l^m(x) with the Condon-Shortley factor (-1)^m, by upward
// recurrence in l from the closed-form P_m^m seed.
double assoc_legendre(int l, int m, double x);
// d/dtheta P_l^m(cos theta); poles theta in {0, pi} are a hard error.
double assoc_legendre_dtheta(int l, int m, double theta);

// Real spherical harmonic Y_l^m(theta, phi), m in [-l, l], orthonormal on the
// sphere: sqrt(2)-scaled cos/sin azimuthal factors for m != 0.
double sph_harmonic(int l, int m, double theta, double phi);
double sph_harmonic_dtheta(int l, int m, double theta, double phi);
double sph_harmonic_dphi(int l, int m, double theta, double phi);

// Full 3D basis vector and derivatives in enumeration order (real path).
Eigen::VectorXd sph_basis(int max_degree, double theta, double phi);
Eigen::VectorXd sph_basis_dtheta(int max_degree, double theta, double phi);
Eigen::VectorXd sph_basis_dphi(int max_degree, double theta, double phi);

BasisVector basis_vector(const BasisSpec& spec, double theta, double phi = 0.0);
BasisGradient basis_gradient(const BasisSpec& spec, double theta, double phi = 0.0);

// Derivative evaluation is undefined at the poles; grid-building callers clamp
// co-elevation to [kPoleGuard, pi - kPoleGuard].
inline constexpr double kPoleGuard = 1e-3;

}  // namespace mmadoa
