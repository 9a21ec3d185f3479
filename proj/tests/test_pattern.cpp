// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "mmadoa/angles.hpp"
#include "mmadoa/errors.hpp"
#include "mmadoa/pattern.hpp"
#include "oracles.hpp"

using namespace mmadoa;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

// constant power pattern g(theta) == c in 2D (single Fourier coefficient)
PatternModel const_model_2d(double c, int ports = 1) {
  Eigen::MatrixXcd g(ports, 1);
  g.setConstant(c * std::sqrt(2.0 * kPi));
  return PatternModel(BasisSpec::two_d(0), g);
}

PatternSamples uniform_sphere_samples(int n_theta, int n_phi, int ports, double value) {
  PatternSamples s;
  s.thetas.resize(n_theta * n_phi);
  s.phis.resize(n_theta * n_phi);
  s.gains = Eigen::MatrixXd::Constant(n_theta * n_phi, ports, value);
  int row = 0;
  for (int i = 0; i < n_theta; ++i)
    for (int j = 0; j < n_phi; ++j, ++row) {
      s.thetas[row] = (i + 0.5) * kPi / n_theta;
      s.phis[row] = 2.0 * kPi * j / n_phi;
    }
  return s;
}

}  // namespace

TEST_SUITE("pattern") {

TEST_CASE("band-limited synthesize-then-fit round trip") {
  const PatternModel truth = synth_pattern(1234, 4, BasisSpec::three_d(4));
  const PatternSamples samples = sample_pattern_grid(truth, 20, 40);
  const FitResult fit = fit_sampling_matrix(samples, truth.basis());

  const Eigen::MatrixXcd expected = truth.sampling_matrix() / truth.normalization_scale();
  CHECK((fit.model.sampling_matrix() - expected).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(fit.residual_rms < 1e-10);
  CHECK(fit.condition < 1e6);
  for (int i = 0; i < samples.size(); ++i) {
    const Eigen::VectorXd g = eval_pattern_raw(fit.model, samples.thetas[i], samples.phis[i]);
    CHECK((g - samples.gains.row(i).transpose()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("2D fit recovers and symmetrizes exactly") {
  const PatternModel truth = synth_pattern(77, 3, BasisSpec::two_d(6));
  const PatternSamples samples = sample_pattern_grid(truth, 180);
  const FitResult fit = fit_sampling_matrix(samples, truth.basis());
  const Eigen::MatrixXcd expected = truth.sampling_matrix() / truth.normalization_scale();
  CHECK((fit.model.sampling_matrix() - expected).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(fit.symmetry_projection < 1e-10);  // unconstrained optimum is already symmetric
}

TEST_CASE("constant pattern fits to the degree-0 coefficient") {
  const double c = 0.7;
  const PatternSamples samples = uniform_sphere_samples(8, 12, 1, c);
  const FitResult fit = fit_sampling_matrix(samples, BasisSpec::three_d(2));
  const Eigen::MatrixXcd& g = fit.model.sampling_matrix();
  CHECK(g(0, 0).real() == doctest::Approx(c * 2.0 * std::sqrt(kPi)).epsilon(1e-10));
  for (int n = 1; n < 9; ++n) CHECK(std::abs(g(0, n)) < 1e-12);
}

TEST_CASE("underdetermined fit is rejected") {
  const PatternSamples samples = uniform_sphere_samples(2, 2, 1, 1.0);  // 4 < 9
  CHECK_THROWS_AS(fit_sampling_matrix(samples, BasisSpec::three_d(2)), ValidationError);
}

TEST_CASE("degenerate sample geometry trips the condition gate") {
  PatternSamples s;  // all samples at the same direction
  const int n = 12;
  s.thetas = Eigen::VectorXd::Constant(n, 1.0);
  s.phis = Eigen::VectorXd::Constant(n, 2.0);
  s.gains = Eigen::MatrixXd::Constant(n, 1, 0.5);
  CHECK_THROWS_AS(fit_sampling_matrix(s, BasisSpec::three_d(1)), ValidationError);
}

TEST_CASE("eval clamps at the gain floor and reports it") {
  // g(theta) = 0.5 + cos(theta) dips below zero
  Eigen::MatrixXcd g(1, 3);
  g(0, 0) = std::sqrt(kPi / 2.0);
  g(0, 1) = 0.5 * std::sqrt(2.0 * kPi);
  g(0, 2) = std::sqrt(kPi / 2.0);
  const PatternModel model(BasisSpec::two_d(1), g);
  const GainEval at_peak = eval_pattern(model, 0.0);
  CHECK(at_peak.gains[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(!at_peak.floor_active);
  const GainEval at_null = eval_pattern(model, kPi);
  CHECK(at_null.gains[0] == kGainFloor);
  CHECK(at_null.floor_active);
  CHECK(eval_pattern_raw(model, kPi)[0] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("normalized constant pattern evaluates to one") {
  const PatternModel model = normalize_pattern(const_model_2d(3.7, 2));
  for (double theta : {-2.0, 0.0, 1.3}) {
    const Eigen::VectorXd gains = eval_pattern(model, theta).gains;
    REQUIRE(gains.size() == 2);
    CHECK(gains[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(gains[1] == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("pattern gradient") {
  const PatternModel constant = const_model_2d(1.0);
  CHECK(eval_pattern_grad(constant, 0.9).d_theta[0] == 0.0);

  const PatternModel m2 = synth_pattern(5, 4, BasisSpec::two_d(6));
  for (double theta : {-1.7, 0.2, 2.4}) {
    const GainGradient grad = eval_pattern_grad(m2, theta);
    CHECK(grad.d_phi.cwiseAbs().maxCoeff() == 0.0);
    for (int p = 0; p < 4; ++p) {
      const double fd = oracles::central_diff(
          [&](double t) { return eval_pattern_raw(m2, t)[p]; }, theta);
      CHECK(oracles::close_rel(grad.d_theta[p], fd, 1e-6, 1e-7));
    }
  }

  const PatternModel m3 = synth_pattern(6, 4, BasisSpec::three_d(6));
  for (double theta : {0.6, 2.1}) {
    const double phi = 1.9;
    const GainGradient grad = eval_pattern_grad(m3, theta, phi);
    for (int p = 0; p < 4; ++p) {
      const double fd_t = oracles::central_diff(
          [&](double t) { return eval_pattern_raw(m3, t, phi)[p]; }, theta);
      const double fd_p = oracles::central_diff(
          [&](double f) { return eval_pattern_raw(m3, theta, f)[p]; }, phi);
      CHECK(oracles::close_rel(grad.d_theta[p], fd_t, 1e-6, 1e-7));
      CHECK(oracles::close_rel(grad.d_phi[p], fd_p, 1e-6, 1e-7));
    }
  }
}

TEST_CASE("normalization against a known analytic maximum") {
  // g(theta) = 2 + 2 cos(theta - delta), maximum 4 at an off-grid angle
  const double delta = 0.21343;
  Eigen::MatrixXcd g(1, 3);
  g(0, 1) = 2.0 * std::sqrt(2.0 * kPi);
  g(0, 2) = std::sqrt(2.0 * kPi) * std::exp(std::complex<double>(0.0, -delta));
  g(0, 0) = std::conj(g(0, 2));
  const PatternModel model(BasisSpec::two_d(1), g);

  // dense-grid oracle confirms the analytic maximum
  double dense_max = 0.0;
  for (int i = 0; i < 3600000 / 100; ++i)
    dense_max = std::max(dense_max, eval_pattern_raw(model, -kPi + i * deg2rad(0.01) * 100)[0]);
  CHECK(dense_max == doctest::Approx(4.0).epsilon(1e-3));

  const PatternModel normalized = normalize_pattern(model);
  CHECK(normalized.normalization_scale() == doctest::Approx(4.0).epsilon(1e-3));

  // post-normalization grid maximum lies in [1 - 1e-9, 1]
  double grid_max = 0.0;
  for (int d = -180; d < 180; ++d)
    grid_max = std::max(grid_max, eval_pattern_raw(normalized, deg2rad(d))[0]);
  CHECK(grid_max <= 1.0 + 1e-12);
  CHECK(grid_max >= 1.0 - 1e-9);

  // idempotence up to grid tolerance
  const PatternModel again = normalize_pattern(normalized);
  CHECK(again.normalization_scale() / normalized.normalization_scale() ==
        doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(normalize_pattern(const_model_2d(0.0)), ValidationError);
}

TEST_CASE("coefficient energy profile") {
  const PatternModel constant = const_model_2d(2.0);
  const Eigen::VectorXd e0 = coefficient_energy(constant);
  CHECK(e0.size() == 1);
  CHECK(e0[0] == doctest::Approx(constant.sampling_matrix().squaredNorm()).epsilon(1e-12));

  // coefficients only at l <= 3 inside an order-6 spec
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist;
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(2, 49);
  for (int l = 0; l <= 3; ++l)
    for (int m = -l; m <= l; ++m)
      for (int p = 0; p < 2; ++p) g(p, (l + 1) * l + m) = dist(rng);
  const PatternModel sparse(BasisSpec::three_d(6), g);
  const Eigen::VectorXd energy = coefficient_energy(sparse);
  REQUIRE(energy.size() == 7);
  for (int l = 4; l <= 6; ++l) CHECK(energy[l] < 1e-20);
  CHECK(energy.sum() == doctest::Approx(g.squaredNorm()).epsilon(1e-12));
  CHECK(select_truncation_order(energy) == 3);

  const PatternModel m2 = synth_pattern(8, 3, BasisSpec::two_d(8));
  const Eigen::VectorXd e2 = coefficient_energy(m2);
  CHECK(e2.sum() == doctest::Approx(m2.sampling_matrix().squaredNorm()).epsilon(1e-12));
}

TEST_CASE("auto-truncation drops empty high orders") {
  const PatternModel truth = synth_pattern(21, 2, BasisSpec::three_d(4));
  const PatternSamples samples = sample_pattern_grid(truth, 24, 48);
  FitOptions options;
  options.auto_truncate = true;
  const FitResult fit = fit_sampling_matrix(samples, BasisSpec::three_d(8), options);
  CHECK(fit.model.basis().order == 4);
  CHECK(fit.residual_rms < 1e-9);
}

TEST_CASE("synthetic patterns are reproducible, nonnegative and normalized") {
  const PatternModel a = synth_pattern(99, 4, BasisSpec::two_d(8));
  const PatternModel b = synth_pattern(99, 4, BasisSpec::two_d(8));
  CHECK((a.sampling_matrix() - b.sampling_matrix()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.normalization_scale() == b.normalization_scale());

  double max_gain = 0.0;
  for (int d = -180; d < 180; ++d) {
    const Eigen::VectorXd raw = eval_pattern_raw(a, deg2rad(d));
    CHECK(raw.minCoeff() > -1e-9);
    CHECK(eval_pattern(a, deg2rad(d)).gains.minCoeff() >= 0.0);
    max_gain = std::max(max_gain, raw.maxCoeff());
  }
  CHECK(max_gain == doctest::Approx(1.0).epsilon(1e-3));

  // mirror symmetry option
  const PatternModel m = synth_pattern(4, 4, BasisSpec::two_d(6), {.mirror = true});
  for (double theta : {0.3, 1.2, 2.8}) {
    const Eigen::VectorXd left = eval_pattern_raw(m, -theta);
    const Eigen::VectorXd right = eval_pattern_raw(m, theta);
    CHECK((left - right).cwiseAbs().maxCoeff() < 1e-9);
  }

  // low-gain band option
  const PatternModel banded =
      synth_pattern(12, 4, BasisSpec::three_d(6), {.low_gain_band = true});
  double near_pole = 0.0, mid = 0.0;
  for (int j = 0; j < 16; ++j) {
    const double phi = 2.0 * kPi * j / 16;
    near_pole = std::max(near_pole, eval_pattern(banded, kPi - 0.05, phi).gains.maxCoeff());
    mid = std::max(mid, eval_pattern(banded, kPi / 3.0, phi).gains.maxCoeff());
  }
  CHECK(near_pole < 0.2 * mid);
}

TEST_CASE("pattern linearity before normalization") {
  const PatternModel base = synth_pattern(31, 2, BasisSpec::two_d(4));
  const PatternModel scaled(base.basis(), 2.5 * base.sampling_matrix(),
                            base.normalization_scale());
  for (double theta : {-0.9, 0.4, 2.2}) {
    const Eigen::VectorXd a = eval_pattern_raw(base, theta);
    const Eigen::VectorXd b = eval_pattern_raw(scaled, theta);
    CHECK((b - 2.5 * a).cwiseAbs().maxCoeff() < 1e-12 * b.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("least-squares fit beats random perturbations") {
  PatternModel truth = synth_pattern(17, 3, BasisSpec::two_d(4));
  PatternSamples samples = sample_pattern_grid(truth, 96);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> noise(0.0, 0.02);
  for (int i = 0; i < samples.size(); ++i)
    for (int p = 0; p < 3; ++p) samples.gains(i, p) += noise(rng);

  const FitResult fit = fit_sampling_matrix(samples, truth.basis());
  auto residual = [&](const Eigen::MatrixXcd& g) {
    double sum = 0.0;
    for (int i = 0; i < samples.size(); ++i) {
      const Eigen::VectorXcd pred = g * fourier_basis(samples.thetas[i], truth.basis().order);
      sum += (pred - samples.gains.row(i).transpose().cast<std::complex<double>>())
                 .squaredNorm();
    }
    return sum;
  };
  const double best = residual(fit.model.sampling_matrix());
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXcd delta(3, truth.basis().length());
    for (int p = 0; p < 3; ++p)
      for (int n = 0; n < truth.basis().length(); ++n)
        delta(p, n) = std::complex<double>(dist(rng), dist(rng));
    delta *= 1e-3 / delta.norm();
    CHECK(best <= residual(fit.model.sampling_matrix() + delta));
  }
}

TEST_CASE("sample CSV round trip and validation") {
  const PatternModel truth = synth_pattern(41, 3, BasisSpec::three_d(3));
  const PatternSamples samples = sample_pattern_grid(truth, 8, 10);
  const std::string path = temp_path("mmadoa_test_samples.csv");
  save_pattern_samples(path, samples);
  const PatternSamples loaded = load_pattern_samples(path);
  REQUIRE(loaded.size() == samples.size());
  CHECK((loaded.thetas - samples.thetas).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.phis - samples.phis).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.gains - samples.gains).cwiseAbs().maxCoeff() == 0.0);

  {
    std::ofstream out(path);
    out << "theta_rad,phi_rad,g1,g2\n0.1,0.2,0.5,0.25\n0.3,0.4,-0.1,0.2\n";
  }
  CHECK_THROWS_WITH_AS(static_cast<void>(load_pattern_samples(path)),
                       doctest::Contains("row 2"), ValidationError);
  {
    std::ofstream out(path);
    out << "theta_rad,phi_rad,g1,g2,g3\n0.1,0.2,0.5,0.25,0.1\n0.3,0.4,0.1,0.2,0.3,0.4\n";
  }
  CHECK_THROWS_WITH_AS(static_cast<void>(load_pattern_samples(path)),
                       doctest::Contains("row 2"), ValidationError);
  {
    std::ofstream out(path);
    out << "theta_rad,phi_rad,gain1\n0.1,0.2,0.5\n";
  }
  CHECK_THROWS_AS(static_cast<void>(load_pattern_samples(path)), ValidationError);
  std::remove(path.c_str());
}

TEST_CASE("model file round trip") {
  const std::string path = temp_path("mmadoa_test_model.txt");
  for (int dim = 0; dim < 2; ++dim) {
    const BasisSpec spec = dim == 0 ? BasisSpec::two_d(5) : BasisSpec::three_d(4);
    const PatternModel model = synth_pattern(1000 + dim, 4, spec);
    save_pattern_model(path, model);
    const PatternModel loaded = load_pattern_model(path);
    CHECK(loaded.basis() == model.basis());
    CHECK(loaded.normalization_scale() == 1.0);
    for (double theta : {0.4, 1.5, 2.8}) {
      const double phi = dim == 0 ? 0.0 : 1.1;
      const Eigen::VectorXd a = eval_pattern_raw(model, theta, phi);
      const Eigen::VectorXd b = eval_pattern_raw(loaded, theta, phi);
      CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
  {
    std::ofstream out(path);
    out << "mma-pattern v2 2d M=1 order=0\n1.0+0.0j\n";
  }
  CHECK_THROWS_AS(static_cast<void>(load_pattern_model(path)), ValidationError);
  std::remove(path.c_str());
}

TEST_CASE("model invariants are validated at construction") {
  Eigen::MatrixXcd bad(1, 3);
  bad(0, 0) = 1.0;
  bad(0, 1) = 2.0;
  bad(0, 2) = std::complex<double>(0.0, 0.5);  // breaks conjugate symmetry
  CHECK_THROWS_AS(PatternModel(BasisSpec::two_d(1), bad), ValidationError);

  Eigen::MatrixXcd imag3d = Eigen::MatrixXcd::Zero(1, 4);
  imag3d(0, 0) = std::complex<double>(1.0, 0.3);
  CHECK_THROWS_AS(PatternModel(BasisSpec::three_d(1), imag3d), ValidationError);

  CHECK_THROWS_AS(PatternModel(BasisSpec::two_d(2), Eigen::MatrixXcd::Ones(1, 3)),
                  ValidationError);  // wrong width
}

}  // TEST_SUITE
