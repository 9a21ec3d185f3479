// SPDX-License-Identifier: Apache-2.0
#include "mmadoa/pattern.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mmadoa/angles.hpp"
#include "mmadoa/errors.hpp"
#include "mmadoa/rng.hpp"

namespace mmadoa {

namespace {

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_complex(const std::complex<double>& z) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.17g%+.17gj", z.real(), z.imag());
  return buf;
}

double parse_double(std::string_view tok, const std::string& where) {
  double v = 0.0;
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);  // from_chars rejects '+'
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw ValidationError(where + ": cannot parse number '" + std::string(tok) + "'");
  return v;
}

std::complex<double> parse_complex(std::string_view tok, const std::string& where) {
  if (tok.empty() || tok.back() != 'j')
    throw ValidationError(where + ": expected complex entry 're+imj', got '" +
                          std::string(tok) + "'");
  std::string_view body = tok.substr(0, tok.size() - 1);
  // split at the sign of the imaginary part (skip leading sign and exponents)
  std::size_t split = std::string_view::npos;
  for (std::size_t i = 1; i < body.size(); ++i) {
    const char c = body[i];
    if ((c == '+' || c == '-') && body[i - 1] != 'e' && body[i - 1] != 'E')
      split = i;  // keep the last candidate: real part may itself carry signs in exponent
  }
  if (split == std::string_view::npos)
    throw ValidationError(where + ": malformed complex entry '" + std::string(tok) + "'");
  const double re = parse_double(body.substr(0, split), where);
  const double im = parse_double(body.substr(split), where);
  return {re, im};
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

// Design matrix with one basis-vector row per sample direction.
Eigen::MatrixXcd design_matrix_2d(const PatternSamples& s, int order) {
  Eigen::MatrixXcd a(s.size(), 2 * order + 1);
  for (int i = 0; i < s.size(); ++i) a.row(i) = fourier_basis(s.thetas[i], order).transpose();
  return a;
}

Eigen::MatrixXd design_matrix_3d(const PatternSamples& s, int order) {
  Eigen::MatrixXd a(s.size(), (order + 1) * (order + 1));
  for (int i = 0; i < s.size(); ++i)
    a.row(i) = sph_basis(order, s.thetas[i], s.phis[i]).transpose();
  return a;
}

// Conjugate symmetry about n = 0, which makes Re(G Psi) exact for real angles.
Eigen::MatrixXcd symmetrize_2d(const Eigen::MatrixXcd& g, int order) {
  Eigen::MatrixXcd h(g.rows(), g.cols());
  for (Eigen::Index m = 0; m < g.rows(); ++m)
    for (int n = -order; n <= order; ++n)
      h(m, order + n) = 0.5 * (g(m, order + n) + std::conj(g(m, order - n)));
  return h;
}

std::vector<double> normalization_thetas(const BasisSpec& spec) {
  std::vector<double> thetas;
  if (spec.dimension == Dimension::TwoD) {
    for (int d = -180; d < 180; ++d) thetas.push_back(deg2rad(d));
  } else {
    for (int d = 1; d <= 179; ++d) thetas.push_back(deg2rad(d));
  }
  return thetas;
}

}  // namespace

void PatternSamples::validate() const {
  if (size() < 1) throw ValidationError("pattern samples: need at least one entry");
  if (phis.size() != thetas.size() || gains.rows() != thetas.size())
    throw ValidationError("pattern samples: inconsistent entry counts");
  if (num_ports() < 1) throw ValidationError("pattern samples: need at least one port");
  if (!thetas.allFinite() || !phis.allFinite() || !gains.allFinite())
    throw ValidationError("pattern samples: non-finite value");
  if ((gains.array() < 0.0).any())
    throw ValidationError("pattern samples: negative gain");
}

PatternModel::PatternModel(BasisSpec spec, Eigen::MatrixXcd sampling_matrix, double scale)
    : spec_(spec), coeff_(std::move(sampling_matrix)), scale_(scale) {
  if (coeff_.rows() < 1) throw ValidationError("pattern model: need at least one port");
  if (coeff_.cols() != spec_.length())
    throw ValidationError("pattern model: sampling matrix has " +
                          std::to_string(coeff_.cols()) + " columns, basis length is " +
                          std::to_string(spec_.length()));
  if (!(scale_ > 0.0) || !std::isfinite(scale_))
    throw ValidationError("pattern model: normalization scale must be positive");
  if (!coeff_.allFinite()) throw ValidationError("pattern model: non-finite coefficient");

  const double mag = std::max(coeff_.cwiseAbs().maxCoeff(), 1e-300);
  if (spec_.dimension == Dimension::ThreeD) {
    if (coeff_.imag().cwiseAbs().maxCoeff() > 1e-9 * mag)
      throw ValidationError("pattern model: 3D sampling matrix must be real");
    real_coeff_ = coeff_.real();
  } else {
    const Eigen::MatrixXcd sym = symmetrize_2d(coeff_, spec_.order);
    if ((coeff_ - sym).cwiseAbs().maxCoeff() > 1e-9 * mag)
      throw ValidationError("pattern model: 2D sampling matrix must be conjugate-symmetric");
  }
}

FitResult fit_sampling_matrix(const PatternSamples& samples, const BasisSpec& spec,
                              const FitOptions& options) {
  samples.validate();
  const int b = spec.length();
  if (samples.size() < b)
    throw ValidationError("fit underdetermined: " + std::to_string(samples.size()) +
                          " samples for basis length " + std::to_string(b));

  Eigen::MatrixXcd g;
  double cond = 0.0, residual = 0.0, sym_dist = 0.0;
  if (spec.dimension == Dimension::TwoD) {
    const Eigen::MatrixXcd a = design_matrix_2d(samples, spec.order);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                   : std::numeric_limits<double>::infinity();
    if (!(cond <= options.max_condition))
      throw ValidationError("fit design matrix is ill-conditioned (condition " +
                            std::to_string(cond) + "); spread the sample directions");
    const Eigen::MatrixXcd x = svd.solve(samples.gains.cast<std::complex<double>>());
    const Eigen::MatrixXcd raw = x.transpose();
    g = symmetrize_2d(raw, spec.order);
    sym_dist = (raw - g).norm();
    residual = (a * g.transpose() - samples.gains.cast<std::complex<double>>()).norm();
  } else {
    const Eigen::MatrixXd a = design_matrix_3d(samples, spec.order);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                   : std::numeric_limits<double>::infinity();
    if (!(cond <= options.max_condition))
      throw ValidationError("fit design matrix is ill-conditioned (condition " +
                            std::to_string(cond) + "); spread the sample directions");
    const Eigen::MatrixXd x = svd.solve(samples.gains);
    g = x.transpose().cast<std::complex<double>>();
    residual = (a * x - samples.gains).norm();
  }

  const double rms = residual / std::sqrt(double(samples.size()) * samples.num_ports());
  FitResult result{PatternModel(spec, std::move(g)), rms, cond, sym_dist};

  if (options.auto_truncate) {
    const Eigen::VectorXd energy = coefficient_energy(result.model);
    const int order = select_truncation_order(energy, options.truncate_rel_energy);
    if (order < spec.order) {
      BasisSpec reduced = spec;
      reduced.order = order;
      FitOptions opts = options;
      opts.auto_truncate = false;
      return fit_sampling_matrix(samples, reduced, opts);
    }
  }
  return result;
}

Eigen::VectorXd eval_pattern_raw(const PatternModel& model, double theta, double phi) {
  if (model.is_2d())
    return (model.sampling_matrix() * fourier_basis(theta, model.basis().order)).real() /
           model.normalization_scale();
  return model.real_coeffs() * sph_basis(model.basis().order, theta, phi) /
         model.normalization_scale();
}

GainEval eval_pattern(const PatternModel& model, double theta, double phi) {
  Eigen::VectorXd raw = eval_pattern_raw(model, theta, phi);
  const bool floored = (raw.array() < kGainFloor).any();
  return GainEval{raw.cwiseMax(kGainFloor), floored};
}

GainGradient eval_pattern_grad(const PatternModel& model, double theta, double phi) {
  GainGradient out;
  const double scale = model.normalization_scale();
  if (model.is_2d()) {
    out.d_theta =
        (model.sampling_matrix() * fourier_basis_dtheta(theta, model.basis().order)).real() /
        scale;
    out.d_phi = Eigen::VectorXd::Zero(model.num_ports());
  } else {
    const int order = model.basis().order;
    out.d_theta = model.real_coeffs() * sph_basis_dtheta(order, theta, phi) / scale;
    out.d_phi = model.real_coeffs() * sph_basis_dphi(order, theta, phi) / scale;
  }
  out.floor_active = (eval_pattern_raw(model, theta, phi).array() < kGainFloor).any();
  return out;
}

PatternModel normalize_pattern(const PatternModel& model) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double theta : normalization_thetas(model.basis())) {
    if (model.is_2d()) {
      peak = std::max(peak, eval_pattern_raw(model, theta).maxCoeff());
    } else {
      for (int d = 0; d < 360; ++d)
        peak = std::max(peak, eval_pattern_raw(model, theta, deg2rad(d)).maxCoeff());
    }
  }
  if (!(peak > 0.0))
    throw ValidationError("normalize_pattern: pattern has no positive maximum");
  return PatternModel(model.basis(), model.sampling_matrix(),
                      model.normalization_scale() * peak);
}

Eigen::VectorXd coefficient_energy(const PatternModel& model) {
  const int order = model.basis().order;
  Eigen::VectorXd energy = Eigen::VectorXd::Zero(order + 1);
  const Eigen::MatrixXcd& g = model.sampling_matrix();
  if (model.is_2d()) {
    for (int n = -order; n <= order; ++n)
      energy[std::abs(n)] += g.col(order + n).squaredNorm();
  } else {
    for (int l = 0; l <= order; ++l)
      for (int m = -l; m <= l; ++m) energy[l] += g.col((l + 1) * l + m).squaredNorm();
  }
  return energy;
}

int select_truncation_order(const Eigen::VectorXd& energy, double rel_tail_energy) {
  const double total = energy.sum();
  if (!(total > 0.0)) return 0;
  double tail = total;
  for (int order = 0; order < energy.size(); ++order) {
    tail -= energy[order];
    if (tail < rel_tail_energy * total) return order;
  }
  return static_cast<int>(energy.size()) - 1;
}

PatternModel synth_pattern(std::uint64_t seed, int num_ports, const BasisSpec& spec,
                           const SynthOptions& options) {
  if (num_ports < 1) throw ValidationError("synth_pattern: need at least one port");
  if (options.mirror && spec.dimension != Dimension::TwoD)
    throw ValidationError("synth_pattern: mirror symmetry is a 2D option");
  if (options.low_gain_band && spec.dimension != Dimension::ThreeD)
    throw ValidationError("synth_pattern: low-gain band is a 3D option");
  if (options.low_gain_band && spec.order < 2)
    throw ValidationError("synth_pattern: low-gain band needs order >= 2");

  RngStream rng(seed);
  PatternSamples samples;

  if (spec.dimension == Dimension::TwoD) {
    const int amp_order = spec.order / 2;
    const int ab = 2 * amp_order + 1;
    Eigen::MatrixXcd amp(num_ports, ab);
    for (int p = 0; p < num_ports; ++p) {
      if (options.mirror) {
        for (int n = 0; n <= amp_order; ++n) {
          const double c = std::exp(-options.smoothness * n) * rng.normal();
          amp(p, amp_order + n) = c;
          amp(p, amp_order - n) = c;
        }
      } else {
        for (int n = -amp_order; n <= amp_order; ++n) {
          const double d = std::exp(-options.smoothness * std::abs(n));
          amp(p, amp_order + n) =
              d * std::complex<double>(rng.normal(), rng.normal()) / std::sqrt(2.0);
        }
      }
    }
    const int n_theta = std::max(8 * (spec.order + 1), 64);
    samples.thetas.resize(n_theta);
    samples.phis = Eigen::VectorXd::Zero(n_theta);
    samples.gains.resize(n_theta, num_ports);
    for (int i = 0; i < n_theta; ++i) {
      const double theta = -kPi + 2.0 * kPi * i / n_theta;
      samples.thetas[i] = theta;
      const Eigen::VectorXcd a = amp * fourier_basis(theta, amp_order);
      samples.gains.row(i) = a.cwiseAbs2().transpose();
    }
  } else {
    const int amp_order = (spec.order - (options.low_gain_band ? 2 : 0)) / 2;
    const int ab = (amp_order + 1) * (amp_order + 1);
    Eigen::MatrixXd amp(num_ports, ab);
    for (int p = 0; p < num_ports; ++p)
      for (int l = 0; l <= amp_order; ++l)
        for (int m = -l; m <= l; ++m)
          amp(p, (l + 1) * l + m) = std::exp(-options.smoothness * l) * rng.normal();

    const int n_theta = 2 * (spec.order + 1);
    const int n_phi = 2 * (2 * spec.order + 1);
    samples.thetas.resize(n_theta * n_phi);
    samples.phis.resize(n_theta * n_phi);
    samples.gains.resize(n_theta * n_phi, num_ports);
    int row = 0;
    for (int i = 0; i < n_theta; ++i) {
      const double theta = (i + 0.5) * kPi / n_theta;
      const double envelope =
          options.low_gain_band
              ? options.band_floor + (1.0 - options.band_floor) * 0.5 * (1.0 + std::cos(theta))
              : 1.0;
      for (int j = 0; j < n_phi; ++j, ++row) {
        const double phi = 2.0 * kPi * j / n_phi;
        samples.thetas[row] = theta;
        samples.phis[row] = phi;
        const Eigen::VectorXd a = envelope * (amp * sph_basis(amp_order, theta, phi));
        samples.gains.row(row) = a.cwiseAbs2().transpose();
      }
    }
  }

  return normalize_pattern(fit_sampling_matrix(samples, spec).model);
}

PatternSamples sample_pattern_grid(const PatternModel& model, int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1)
    throw ValidationError("sample_pattern_grid: grid sizes must be positive");
  PatternSamples s;
  if (model.is_2d()) {
    s.thetas.resize(n_theta);
    s.phis = Eigen::VectorXd::Zero(n_theta);
    s.gains.resize(n_theta, model.num_ports());
    for (int i = 0; i < n_theta; ++i) {
      s.thetas[i] = -kPi + 2.0 * kPi * i / n_theta;
      s.gains.row(i) = eval_pattern_raw(model, s.thetas[i]).cwiseMax(0.0).transpose();
    }
  } else {
    s.thetas.resize(n_theta * n_phi);
    s.phis.resize(n_theta * n_phi);
    s.gains.resize(n_theta * n_phi, model.num_ports());
    int row = 0;
    for (int i = 0; i < n_theta; ++i)
      for (int j = 0; j < n_phi; ++j, ++row) {
        s.thetas[row] = (i + 0.5) * kPi / n_theta;
        s.phis[row] = 2.0 * kPi * j / n_phi;
        s.gains.row(row) =
            eval_pattern_raw(model, s.thetas[row], s.phis[row]).cwiseMax(0.0).transpose();
      }
  }
  return s;
}

PatternSamples load_pattern_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open samples file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  strip_cr(line);
  const auto header = split(line, ',');
  if (header.size() < 3 || header[0] != "theta_rad" || header[1] != "phi_rad")
    throw ValidationError(path + ": expected header theta_rad,phi_rad,g1,...,gM");
  const int ports = static_cast<int>(header.size()) - 2;
  for (int m = 0; m < ports; ++m)
    if (header[m + 2] != "g" + std::to_string(m + 1))
      throw ValidationError(path + ": gain column " + std::to_string(m + 1) +
                            " must be named g" + std::to_string(m + 1));

  std::vector<double> thetas, phis;
  std::vector<double> gains;
  int row = 0;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    ++row;
    const std::string where = path + ": row " + std::to_string(row);
    const auto tokens = split(line, ',');
    if (static_cast<int>(tokens.size()) != ports + 2)
      throw ValidationError(where + ": expected " + std::to_string(ports + 2) +
                            " columns, got " + std::to_string(tokens.size()));
    thetas.push_back(parse_double(tokens[0], where));
    phis.push_back(parse_double(tokens[1], where));
    for (int m = 0; m < ports; ++m) {
      const double g = parse_double(tokens[m + 2], where);
      if (g < 0.0)
        throw ValidationError(where + ": negative gain g" + std::to_string(m + 1) + " = " +
                              fmt_full(g));
      gains.push_back(g);
    }
  }
  if (row == 0) throw ValidationError(path + ": no sample rows");

  PatternSamples s;
  s.thetas = Eigen::Map<Eigen::VectorXd>(thetas.data(), row);
  s.phis = Eigen::Map<Eigen::VectorXd>(phis.data(), row);
  s.gains = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      gains.data(), row, ports);
  s.validate();
  return s;
}

void save_pattern_samples(const std::string& path, const PatternSamples& samples) {
  samples.validate();
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write samples file: " + path);
  out << "theta_rad,phi_rad";
  for (int m = 1; m <= samples.num_ports(); ++m) out << ",g" << m;
  out << "\n";
  for (int i = 0; i < samples.size(); ++i) {
    out << fmt_full(samples.thetas[i]) << ',' << fmt_full(samples.phis[i]);
    for (int m = 0; m < samples.num_ports(); ++m) out << ',' << fmt_full(samples.gains(i, m));
    out << "\n";
  }
  if (!out) throw ValidationError("write failed: " + path);
}

PatternModel load_pattern_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  strip_cr(line);
  std::istringstream header(line);
  std::string magic, version, dim, mtok, otok;
  header >> magic >> version >> dim >> mtok >> otok;
  if (magic != "mma-pattern" || version != "v1" || (dim != "2d" && dim != "3d") ||
      mtok.rfind("M=", 0) != 0 || otok.rfind("order=", 0) != 0)
    throw ValidationError(path + ": bad header, expected 'mma-pattern v1 <2d|3d> M=<M> order=<order>'");
  const int ports = static_cast<int>(parse_double(std::string_view(mtok).substr(2), path));
  const int order = static_cast<int>(parse_double(std::string_view(otok).substr(6), path));
  if (ports < 1) throw ValidationError(path + ": M must be >= 1");
  const BasisSpec spec =
      dim == "2d" ? BasisSpec::two_d(order) : BasisSpec::three_d(order);

  Eigen::MatrixXcd g(ports, spec.length());
  for (int m = 0; m < ports; ++m) {
    if (!std::getline(in, line))
      throw ValidationError(path + ": expected " + std::to_string(ports) + " coefficient rows");
    strip_cr(line);
    std::istringstream row(line);
    std::string tok;
    const std::string where = path + ": port " + std::to_string(m + 1);
    for (int n = 0; n < spec.length(); ++n) {
      if (!(row >> tok)) throw ValidationError(where + ": too few coefficients");
      g(m, n) = dim == "2d" ? parse_complex(tok, where)
                            : std::complex<double>(parse_double(tok, where), 0.0);
    }
    if (row >> tok) throw ValidationError(where + ": too many coefficients");
  }
  return PatternModel(spec, std::move(g));
}

void save_pattern_model(const std::string& path, const PatternModel& model) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write model file: " + path);
  const bool twod = model.is_2d();
  out << "mma-pattern v1 " << (twod ? "2d" : "3d") << " M=" << model.num_ports()
      << " order=" << model.basis().order << "\n";
  // the stored matrix absorbs the normalization scale
  const Eigen::MatrixXcd g = model.sampling_matrix() / model.normalization_scale();
  for (int m = 0; m < model.num_ports(); ++m) {
    for (int n = 0; n < model.basis().length(); ++n) {
      if (n) out << ' ';
      out << (twod ? fmt_complex(g(m, n)) : fmt_full(g(m, n).real()));
    }
    out << "\n";
  }
  if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace mmadoa
