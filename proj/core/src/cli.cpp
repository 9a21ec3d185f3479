// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "mmadoa/angles.hpp"
#include "mmadoa/errors.hpp"
#include "mmadoa/harness.hpp"

namespace mmadoa {

namespace {

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

BasisSpec make_spec(const std::string& dim, int order) {
  if (dim == "2d") return BasisSpec::two_d(order);
  if (dim == "3d") return BasisSpec::three_d(order);
  throw ValidationError("--dim must be 2d or 3d");
}

void setup_app(CLI::App& app) {
  app.require_subcommand(1);

  // synth
  {
    auto* cmd = app.add_subcommand("synth", "Generate a synthetic band-limited pattern");
    auto ports = std::make_shared<int>(4);
    auto order = std::make_shared<int>(6);
    auto seed = std::make_shared<std::uint64_t>(0);
    auto out = std::make_shared<std::string>();
    auto dim = std::make_shared<std::string>("3d");
    auto smoothness = std::make_shared<double>(0.8);
    auto mirror = std::make_shared<bool>(false);
    auto band = std::make_shared<bool>(false);
    cmd->add_option("--ports", *ports, "Number of antenna ports")->required();
    cmd->add_option("--order", *order, "Basis order of the power pattern")->required();
    cmd->add_option("--seed", *seed, "Random seed")->required();
    cmd->add_option("--out", *out, "Output model file")->required();
    cmd->add_option("--dim", *dim, "Manifold dimension: 2d or 3d");
    cmd->add_option("--smoothness", *smoothness, "Per-degree coefficient decay rate");
    cmd->add_flag("--mirror", *mirror, "2D: make the pattern mirror-symmetric");
    cmd->add_flag("--low-gain-band", *band, "3D: suppress gain toward theta = 180 deg");
    cmd->callback([=] {
      SynthOptions options;
      options.smoothness = *smoothness;
      options.mirror = *mirror;
      options.low_gain_band = *band;
      const PatternModel model = synth_pattern(*seed, *ports, make_spec(*dim, *order), options);
      save_pattern_model(*out, model);
      std::cout << "wrote " << *out << "\n";
    });
  }

  // fit
  {
    auto* cmd = app.add_subcommand("fit", "Fit a sampling matrix to calibration samples");
    auto samples = std::make_shared<std::string>();
    auto dim = std::make_shared<std::string>();
    auto order = std::make_shared<int>(0);
    auto out = std::make_shared<std::string>();
    auto truncate = std::make_shared<bool>(false);
    cmd->add_option("--samples", *samples, "Input sample CSV")->required();
    cmd->add_option("--dim", *dim, "Manifold dimension: 2d or 3d")->required();
    cmd->add_option("--order", *order, "Basis order")->required();
    cmd->add_option("--out", *out, "Output model file")->required();
    cmd->add_flag("--auto-truncate", *truncate, "Drop basis orders with negligible energy");
    cmd->callback([=] {
      FitOptions options;
      options.auto_truncate = *truncate;
      const FitResult result =
          fit_sampling_matrix(load_pattern_samples(*samples), make_spec(*dim, *order), options);
      save_pattern_model(*out, normalize_pattern(result.model));
      std::cout << "residual_rms=" << fmt9(result.residual_rms) << "\n";
      std::cout << "condition=" << fmt9(result.condition) << "\n";
      if (*dim == "2d")
        std::cout << "symmetry_projection=" << fmt9(result.symmetry_projection) << "\n";
      std::cout << "order=" << result.model.basis().order << "\n";
      std::cout << "wrote " << *out << "\n";
    });
  }

  // eval
  {
    auto* cmd = app.add_subcommand("eval", "Evaluate pattern gains at a direction");
    auto model_path = std::make_shared<std::string>();
    auto theta = std::make_shared<double>(0.0);
    auto phi = std::make_shared<double>(0.0);
    cmd->add_option("--model", *model_path, "Model file")->required();
    cmd->add_option("--theta-deg", *theta, "Co-elevation (3D) or angle (2D), degrees")
        ->required();
    cmd->add_option("--phi-deg", *phi, "Azimuth in degrees (3D)");
    cmd->callback([=] {
      const PatternModel model = load_pattern_model(*model_path);
      const GainEval ge = eval_pattern(model, deg2rad(*theta), deg2rad(*phi));
      std::cout << "port,gain\n";
      for (Eigen::Index m = 0; m < ge.gains.size(); ++m)
        std::cout << (m + 1) << ',' << fmt9(ge.gains[m]) << "\n";
    });
  }

  // simulate
  {
    auto* cmd = app.add_subcommand("simulate", "Simulate one power measurement");
    auto model_path = std::make_shared<std::string>();
    auto theta = std::make_shared<double>(0.0);
    auto phi = std::make_shared<double>(0.0);
    auto snr = std::make_shared<double>(20.0);
    auto k = std::make_shared<int>(100);
    auto seed = std::make_shared<std::uint64_t>(0);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--model", *model_path, "Model file")->required();
    cmd->add_option("--theta-deg", *theta, "True angle, degrees")->required();
    cmd->add_option("--phi-deg", *phi, "True azimuth, degrees (3D)");
    cmd->add_option("--snr-db", *snr, "SNR in dB (noise variance fixed at 1)")->required();
    cmd->add_option("--k", *k, "Snapshots per measurement")->required();
    cmd->add_option("--seed", *seed, "Random seed")->required();
    cmd->add_option("--out", *out, "Output measurement CSV")->required();
    cmd->callback([=] {
      const PatternModel model = load_pattern_model(*model_path);
      SignalParams params;
      params.theta = deg2rad(*theta);
      params.phi = deg2rad(*phi);
      params.signal_power = std::pow(10.0, *snr / 10.0);
      params.noise_var = 1.0;
      RngStream rng = RngStream::derive(*seed, 0, 0);
      const PowerMeasurement meas = simulate_power(model, params, *k, rng);
      std::string meta = "model=" + *model_path + " theta_deg=" + fmt9(*theta) +
                         " phi_deg=" + fmt9(*phi) + " snr_db=" + fmt9(*snr) +
                         " seed=" + std::to_string(*seed);
      save_measurement(*out, meas, meta);
      std::cout << "wrote " << *out << "\n";
    });
  }

  // estimate
  {
    auto* cmd = app.add_subcommand("estimate", "Estimate the direction of arrival");
    auto model_path = std::make_shared<std::string>();
    auto meas_path = std::make_shared<std::string>();
    auto objective = std::make_shared<std::string>("ml");
    auto fov = std::make_shared<std::string>("full");
    auto phi_fov = std::make_shared<std::string>();
    auto k = std::make_shared<int>(0);
    cmd->add_option("--model", *model_path, "Model file")->required();
    cmd->add_option("--meas", *meas_path, "Measurement CSV")->required();
    cmd->add_option("--objective", *objective, "ml or simplified");
    cmd->add_option("--fov-deg", *fov, "Field of view 'lo:hi' in degrees");
    cmd->add_option("--phi-fov-deg", *phi_fov, "3D azimuth field of view 'lo:hi'");
    cmd->add_option("--k", *k, "Override snapshot count");
    cmd->callback([=] {
      const PatternModel model = load_pattern_model(*model_path);
      const PowerMeasurement meas = load_measurement(*meas_path, *k);
      EstimatorConfig config;
      config.objective = objective_from_string(*objective);
      config.fov = parse_fov_deg(*fov);
      if (!phi_fov->empty()) {
        const FieldOfView pf = parse_fov_deg(*phi_fov);
        if (pf.theta.size() != 1) throw ValidationError("--phi-fov-deg must be one interval");
        if (config.fov.theta.empty()) config.fov = FieldOfView::full(model.basis());
        config.fov.phi = pf.theta[0];
      }
      const Estimate est = EstimationContext(model, config).estimate(meas);
      std::cout << "theta_deg=" << fmt9(rad2deg(est.params_hat.theta)) << "\n";
      if (!model.is_2d()) std::cout << "phi_deg=" << fmt9(rad2deg(est.params_hat.phi)) << "\n";
      std::cout << "ps=" << fmt9(est.params_hat.signal_power) << "\n";
      std::cout << "sigma2=" << fmt9(est.params_hat.noise_var) << "\n";
      std::cout << "snr_db=" << fmt9(snr_db(est.params_hat)) << "\n";
      std::cout << "objective_value=" << fmt9(est.objective_value) << "\n";
      std::cout << "converged=" << (est.converged ? 1 : 0) << "\n";
      std::cout << "floor_active=" << (est.floor_active ? 1 : 0) << "\n";
    });
  }

  // crb
  {
    auto* cmd = app.add_subcommand("crb", "Cramer-Rao bound over an angle grid");
    auto model_path = std::make_shared<std::string>();
    auto snr = std::make_shared<double>(20.0);
    auto k = std::make_shared<int>(100);
    auto step = std::make_shared<double>(1.0);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--model", *model_path, "Model file")->required();
    cmd->add_option("--snr-db", *snr, "SNR in dB")->required();
    cmd->add_option("--k", *k, "Snapshots per measurement")->required();
    cmd->add_option("--grid-deg", *step, "Grid step in degrees");
    cmd->add_option("--out", *out, "Output CSV")->required();
    cmd->callback([=] {
      const PatternModel model = load_pattern_model(*model_path);
      if (!(*step > 0.0)) throw ValidationError("--grid-deg must be positive");
      SweepConfig config;
      config.experiment = Experiment::CrbOnly;
      config.model_path = *model_path;
      config.snr_db = {*snr};
      config.num_snapshots = *k;
      if (model.is_2d()) {
        config.theta_grid = {-180.0, 180.0 - *step, *step};
      } else {
        config.theta_grid = {*step, 180.0 - *step, *step};
        config.phi_grid = {0.0, 360.0 - *step, *step};
      }
      write_sweep_csv(*out, run_crb_only(config, model));
      std::cout << "wrote " << *out << "\n";
    });
  }

  // sweep
  {
    auto* cmd = app.add_subcommand("sweep", "Run a Monte Carlo sweep experiment");
    auto experiment = std::make_shared<std::string>();
    auto config_path = std::make_shared<std::string>();
    auto out_dir = std::make_shared<std::string>();
    cmd->add_option("--experiment", *experiment, "angle2d, snr2d or map3d")->required();
    cmd->add_option("--config", *config_path, "Sweep configuration file")->required();
    cmd->add_option("--out", *out_dir, "Output directory")->required();
    cmd->callback([=] {
      SweepConfig config = load_sweep_config(*config_path);
      config.experiment = experiment_from_string(*experiment);
      if (config.model_path.empty())
        throw ValidationError(*config_path + ": missing 'model' key");
      const PatternModel model = load_pattern_model(config.model_path);
      const SweepResult result = run_sweep(config, model);
      std::filesystem::create_directories(*out_dir);
      const std::string path =
          (std::filesystem::path(*out_dir) / (to_string(config.experiment) + ".csv")).string();
      write_sweep_csv(path, result);
      std::cout << "wrote " << path << "\n";
    });
  }
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"Power-based direction-of-arrival estimation with a multi-mode antenna"};
  setup_app(app);

  std::vector<const char*> argv;
  argv.push_back("mmadoa");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args);
}

}  // namespace mmadoa
