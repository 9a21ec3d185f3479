// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "mmadoa/angles.hpp"
#include "mmadoa/basis.hpp"
#include "mmadoa/errors.hpp"
#include "oracles.hpp"

using namespace mmadoa;
using oracles::close_rel;

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

// complex central difference through real/imag parts
Eigen::VectorXcd fd_vector(const std::function<Eigen::VectorXcd(double)>& f, double x,
                           double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

double max_rel_err(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-9);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_SUITE("basis") {

TEST_CASE("fourier basis values") {
  const Eigen::VectorXcd v = fourier_basis(0.0, 2);
  REQUIRE(v.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(v[i].real() == doctest::Approx(kInvSqrt2Pi).epsilon(1e-12));
    CHECK(v[i].imag() == doctest::Approx(0.0).epsilon(1e-12));
  }

  const Eigen::VectorXcd w = fourier_basis(kPi / 2.0, 1);
  CHECK(std::abs(w[0] - std::complex<double>(0.0, -kInvSqrt2Pi)) < 1e-15);
  CHECK(std::abs(w[1] - std::complex<double>(kInvSqrt2Pi, 0.0)) < 1e-15);
  CHECK(std::abs(w[2] - std::complex<double>(0.0, kInvSqrt2Pi)) < 1e-15);
}

TEST_CASE("fourier orthonormality under uniform quadrature") {
  const int order = 6;
  const int n = 2048;
  const int b = 2 * order + 1;
  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(b, b);
  for (int i = 0; i < n; ++i) {
    const double theta = -kPi + 2.0 * kPi * i / n;
    const Eigen::VectorXcd v = fourier_basis(theta, order);
    gram += v * v.adjoint() * (2.0 * kPi / n);
  }
  const double err = (gram - Eigen::MatrixXcd::Identity(b, b)).cwiseAbs().maxCoeff();
  CHECK(err < 1e-10);
}

TEST_CASE("fourier derivative") {
  const Eigen::VectorXcd d0 = fourier_basis_dtheta(0.0, 1);
  CHECK(std::abs(d0[0] - std::complex<double>(0.0, -kInvSqrt2Pi)) < 1e-15);
  CHECK(std::abs(d0[1]) == 0.0);
  CHECK(std::abs(d0[2] - std::complex<double>(0.0, kInvSqrt2Pi)) < 1e-15);

  for (double theta : {-2.0, 0.3, 1.1, 2.9}) {
    CHECK(std::abs(fourier_basis_dtheta(theta, 4)[4]) == 0.0);  // n = 0 entry
    const Eigen::VectorXcd fd =
        fd_vector([](double t) { return fourier_basis(t, 5); }, theta);
    CHECK(max_rel_err(fourier_basis_dtheta(theta, 5), fd) < 1e-6);
  }
}

TEST_CASE("associated Legendre values and closed forms") {
  CHECK(assoc_legendre(0, 0, 0.3) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(assoc_legendre(1, 0, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(assoc_legendre(3, 2, 0.5) == doctest::Approx(5.625).epsilon(1e-13));

  std::mt19937_64 rng(91);
  std::uniform_real_distribution<double> ux(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double x = ux(rng);
    for (int l = 0; l <= 4; ++l)
      for (int m = 0; m <= l; ++m)
        CHECK(std::abs(assoc_legendre(l, m, x) - oracles::legendre_closed_form(l, m, x)) <
              1e-12);
  }

  CHECK_THROWS_AS(assoc_legendre(2, 3, 0.1), ValidationError);
  CHECK_THROWS_AS(assoc_legendre(2, -1, 0.1), ValidationError);
  CHECK_THROWS_AS(assoc_legendre(2, 0, 1.2), ValidationError);
}

TEST_CASE("associated Legendre theta derivative") {
  CHECK(assoc_legendre_dtheta(1, 0, kPi / 2.0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(assoc_legendre_dtheta(0, 0, 1.3) == doctest::Approx(0.0));

  for (double theta : {0.2, 1.0, 2.5})
    for (int l = 0; l <= 8; ++l)
      for (int m = 0; m <= l; ++m) {
        const double fd = oracles::central_diff(
            [&](double t) { return assoc_legendre(l, m, std::cos(t)); }, theta);
        const double an = assoc_legendre_dtheta(l, m, theta);
        CHECK(close_rel(an, fd, 1e-6, 1e-7));
      }

  CHECK_THROWS_AS(assoc_legendre_dtheta(2, 1, 0.0), ValidationError);
  CHECK_THROWS_AS(assoc_legendre_dtheta(2, 1, kPi), ValidationError);
}

TEST_CASE("spherical harmonic values") {
  CHECK(sph_harmonic(0, 0, 0.7, 2.1) == doctest::Approx(0.2820947917738781).epsilon(1e-12));
  CHECK(sph_harmonic(1, 0, 0.0, 0.0) == doctest::Approx(0.4886025119029199).epsilon(1e-12));
  CHECK_THROWS_AS(sph_harmonic(1, 2, 0.5, 0.5), ValidationError);
}

TEST_CASE("spherical harmonic orthonormality") {
  const int order = 6;
  const int b = (order + 1) * (order + 1);
  const oracles::GaussLegendre gl(2 * order + 2, -1.0, 1.0);
  const int n_phi = 4 * order + 4;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(b, b);
  for (std::size_t i = 0; i < gl.x.size(); ++i) {
    const double theta = std::acos(gl.x[i]);
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * kPi * j / n_phi;
      const Eigen::VectorXd y = sph_basis(order, theta, phi);
      gram += gl.w[i] * (2.0 * kPi / n_phi) * (y * y.transpose());
    }
  }
  const double err = (gram - Eigen::MatrixXd::Identity(b, b)).cwiseAbs().maxCoeff();
  CHECK(err < 1e-8);
}

TEST_CASE("spherical harmonic derivatives match finite differences") {
  CHECK(sph_harmonic_dtheta(0, 0, 1.0, 1.0) == doctest::Approx(0.0));
  CHECK(sph_harmonic_dtheta(1, 0, kPi / 2.0, 0.0) ==
        doctest::Approx(-0.4886025119029199).epsilon(1e-12));
  CHECK(sph_harmonic_dphi(2, 0, 0.9, 4.0) == doctest::Approx(0.0));
  CHECK(sph_harmonic_dphi(1, 1, kPi / 2.0, 0.0) == doctest::Approx(0.0).epsilon(1e-12));

  for (double theta : {0.3, 1.2, 2.7})
    for (double phi : {0.1, 2.0, 5.0})
      for (int l = 0; l <= 6; ++l)
        for (int m = -l; m <= l; ++m) {
          const double fd_t = oracles::central_diff(
              [&](double t) { return sph_harmonic(l, m, t, phi); }, theta);
          CHECK(close_rel(sph_harmonic_dtheta(l, m, theta, phi), fd_t, 1e-6, 1e-7));
          const double fd_p = oracles::central_diff(
              [&](double p) { return sph_harmonic(l, m, theta, p); }, phi);
          CHECK(close_rel(sph_harmonic_dphi(l, m, theta, phi), fd_p, 1e-6, 1e-7));
        }

  CHECK_THROWS_AS(sph_harmonic_dtheta(1, 0, 0.0, 0.0), ValidationError);
  CHECK_THROWS_AS(sph_basis_dtheta(3, kPi, 0.0), ValidationError);
}

TEST_CASE("basis vector assembly") {
  const BasisVector v3 = basis_vector(BasisSpec::three_d(1), kPi / 2.0, 0.0);
  REQUIRE(v3.values.size() == 4);
  CHECK(v3.values[0].real() == doctest::Approx(0.2820947917738781).epsilon(1e-12));
  CHECK(v3.values[1].real() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v3.values[2].real() == doctest::Approx(0.0).epsilon(1e-12));
  // with the Condon-Shortley phase P_1^1(0) = -1, so the m = 1 entry is negative
  CHECK(v3.values[3].real() == doctest::Approx(-0.4886025119029199).epsilon(1e-12));
  for (int i = 0; i < 4; ++i) CHECK(v3.values[i].imag() == 0.0);

  const BasisVector v2 = basis_vector(BasisSpec::two_d(0), 1.234);
  REQUIRE(v2.values.size() == 1);
  CHECK(std::abs(v2.values[0] - std::complex<double>(kInvSqrt2Pi, 0.0)) < 1e-15);

  CHECK(basis_vector(BasisSpec::three_d(2), 1.0, 1.0).values.size() == 9);
}

TEST_CASE("basis gradient assembly") {
  const BasisSpec spec2 = BasisSpec::two_d(3);
  const BasisGradient g2 = basis_gradient(spec2, 0.77);
  CHECK((g2.d_theta - fourier_basis_dtheta(0.77, 3)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g2.d_phi.cwiseAbs().maxCoeff() == 0.0);

  const BasisSpec spec3 = BasisSpec::three_d(1);
  const BasisGradient g3 = basis_gradient(spec3, 1.1, 0.6);
  CHECK(std::abs(g3.d_phi[2]) == 0.0);  // (l=1, m=0) has no azimuth dependence

  for (double theta : {0.4, 1.5}) {
    for (double phi : {0.2, 3.3}) {
      const BasisGradient g = basis_gradient(BasisSpec::three_d(4), theta, phi);
      const Eigen::VectorXcd fd_t = fd_vector(
          [&](double t) { return basis_vector(BasisSpec::three_d(4), t, phi).values; },
          theta);
      const Eigen::VectorXcd fd_p = fd_vector(
          [&](double p) { return basis_vector(BasisSpec::three_d(4), theta, p).values; },
          phi);
      CHECK(max_rel_err(g.d_theta, fd_t) < 1e-6);
      CHECK(max_rel_err(g.d_phi, fd_p) < 1e-6);
    }
  }
}

TEST_CASE("enumeration bijectivity and realness") {
  for (int l = 0; l <= 8; ++l)
    for (int m = -l; m <= l; ++m) {
      const int n = sph_index(l, m);
      const auto [l2, m2] = sph_degree_order(n);
      CHECK(l2 == l);
      CHECK(m2 == m);
    }
  CHECK(sph_index(1, 0) == 2);
  CHECK(BasisSpec::three_d(2).length() == 9);
  CHECK(BasisSpec::two_d(4).length() == 9);

  // 2D conjugate symmetry about n = 0
  for (double theta : {-2.2, 0.1, 1.9}) {
    const Eigen::VectorXcd v = fourier_basis(theta, 5);
    for (int n = 0; n <= 5; ++n)
      CHECK(std::abs(v[5 - n] - std::conj(v[5 + n])) < 1e-15);
  }
}

}  // TEST_SUITE
