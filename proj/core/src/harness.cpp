// SPDX-License-Identifier: Apache-2.0
#include "mmadoa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "mmadoa/angles.hpp"
#include "mmadoa/errors.hpp"
#include "mmadoa/rng.hpp"

namespace mmadoa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_str(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_num(const std::string& tok, const std::string& where) {
  std::string t = trim(tok);
  if (!t.empty() && t.front() == '+') t.erase(0, 1);  // from_chars rejects '+'
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw ValidationError(where + ": cannot parse number '" + tok + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& tok, const std::string& where) {
  const std::string t = trim(tok);
  std::uint64_t v = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw ValidationError(where + ": cannot parse integer '" + tok + "'");
  return v;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n));
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(err_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

GridSpec parse_grid(const std::string& text, const std::string& where) {
  const auto parts = split_str(text, ':');
  if (parts.size() != 3)
    throw ValidationError(where + ": grid must be 'start:stop:step' in degrees");
  GridSpec g{parse_num(parts[0], where), parse_num(parts[1], where), parse_num(parts[2], where)};
  if (!(g.step_deg > 0.0)) throw ValidationError(where + ": grid step must be positive");
  if (!(g.stop_deg >= g.start_deg)) throw ValidationError(where + ": grid stop < start");
  return g;
}

// Per-cell Monte Carlo accumulator shared by all sweep experiments.
struct CellOut {
  double rmse_theta_deg = 0.0;
  double rmse_phi_deg = 0.0;
  double rmse_gc_deg = 0.0;
  double ambiguity_rate = 0.0;
  double floor_rate = 0.0;
};

CellOut run_trials(const PatternModel& model, const EstimationContext& ctx,
                   const SignalParams& truth, int num_snapshots, int trials,
                   std::uint64_t seed, std::uint64_t cell_key, double crb_theta_rad,
                   double crb_phi_rad) {
  const bool three_d = !model.is_2d();
  const double th_theta = std::isfinite(crb_theta_rad) ? 3.0 * std::sqrt(crb_theta_rad) : kInf;
  const double th_phi = std::isfinite(crb_phi_rad) ? 3.0 * std::sqrt(crb_phi_rad) : kInf;

  double sq_theta = 0.0, sq_phi = 0.0, sq_gc = 0.0;
  int ambiguous = 0, floored = 0;
  for (int t = 0; t < trials; ++t) {
    RngStream rng = RngStream::derive(seed, cell_key, static_cast<std::uint64_t>(t));
    const PowerMeasurement meas = simulate_power(model, truth, num_snapshots, rng);
    const Estimate est = ctx.estimate(meas);
    const double e_theta = three_d ? est.params_hat.theta - truth.theta
                                   : wrap_pi(est.params_hat.theta - truth.theta);
    sq_theta += e_theta * e_theta;
    bool amb = std::abs(e_theta) > th_theta;
    if (three_d) {
      const double e_phi = wrap_pi(est.params_hat.phi - truth.phi);
      sq_phi += e_phi * e_phi;
      const double gc = great_circle_angle(truth.theta, truth.phi, est.params_hat.theta,
                                           est.params_hat.phi);
      sq_gc += gc * gc;
      amb = amb || std::abs(e_phi) > th_phi;
    }
    if (amb) ++ambiguous;
    if (est.floor_active) ++floored;
  }

  CellOut out;
  out.rmse_theta_deg = rad2deg(std::sqrt(sq_theta / trials));
  out.rmse_phi_deg = rad2deg(std::sqrt(sq_phi / trials));
  out.rmse_gc_deg = rad2deg(std::sqrt(sq_gc / trials));
  out.ambiguity_rate = static_cast<double>(ambiguous) / trials;
  out.floor_rate = static_cast<double>(floored) / trials;
  return out;
}

// Truth points (radians) restricted to the estimator's field of view, keyed by
// their index in the configured grid so random streams pair across runs.
std::vector<std::pair<int, double>> clip_grid(const GridSpec& grid, const FieldOfView& fov) {
  std::vector<std::pair<int, double>> pts;
  const auto deg = grid.points_deg();
  for (int i = 0; i < static_cast<int>(deg.size()); ++i) {
    const double rad = deg2rad(deg[i]);
    bool inside = fov.theta.empty();
    for (const auto& iv : fov.theta)
      inside = inside || (rad >= iv.lo - 1e-12 && rad <= iv.hi + 1e-12);
    if (inside) pts.emplace_back(i, rad);
  }
  return pts;
}

double crb_sqrt_deg(double crb_rad) {
  return std::isfinite(crb_rad) ? rad2deg(std::sqrt(crb_rad)) : kInf;
}

void require(bool cond, const std::string& message) {
  if (!cond) throw ValidationError(message);
}

void validate_common(const SweepConfig& config) {
  require(config.trials >= 1, "sweep config: trials must be >= 1");
  require(config.num_snapshots >= 1, "sweep config: k must be >= 1");
  require(!config.snr_db.empty(), "sweep config: snr_db list is empty");
  require(!config.objectives.empty(), "sweep config: objectives list is empty");
}

}  // namespace

Experiment experiment_from_string(const std::string& name) {
  if (name == "angle2d") return Experiment::AngleSweep2D;
  if (name == "snr2d") return Experiment::SnrSweep2D;
  if (name == "map3d") return Experiment::Map3D;
  if (name == "crbonly") return Experiment::CrbOnly;
  throw ValidationError("unknown experiment '" + name +
                        "' (expected angle2d, snr2d, map3d or crbonly)");
}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::AngleSweep2D: return "angle2d";
    case Experiment::SnrSweep2D: return "snr2d";
    case Experiment::Map3D: return "map3d";
    case Experiment::CrbOnly: return "crbonly";
  }
  return "?";
}

Objective objective_from_string(const std::string& name) {
  if (name == "ml") return Objective::ML;
  if (name == "simplified") return Objective::Simplified;
  throw ValidationError("unknown objective '" + name + "' (expected ml or simplified)");
}

std::string to_string(Objective o) {
  return o == Objective::ML ? "ml" : "simplified";
}

FieldOfView parse_fov_deg(const std::string& text) {
  FieldOfView fov;
  if (trim(text) == "full") return fov;
  for (const auto& part : split_str(text, '|')) {
    const auto bounds = split_str(part, ':');
    if (bounds.size() != 2)
      throw ValidationError("field of view must be 'lo:hi' in degrees, got '" + part + "'");
    AngleInterval iv{deg2rad(parse_num(bounds[0], "fov")), deg2rad(parse_num(bounds[1], "fov"))};
    if (!(iv.lo <= iv.hi)) throw ValidationError("field of view has lo > hi");
    fov.theta.push_back(iv);
  }
  return fov;
}

std::string fov_string_deg(const FieldOfView& fov) {
  std::string out;
  for (std::size_t i = 0; i < fov.theta.size(); ++i) {
    if (i) out += '|';
    out += fmt9(rad2deg(fov.theta[i].lo)) + ":" + fmt9(rad2deg(fov.theta[i].hi));
  }
  return out.empty() ? "full" : out;
}

std::vector<double> GridSpec::points_deg() const {
  std::vector<double> pts;
  for (int i = 0;; ++i) {
    const double v = start_deg + i * step_deg;
    if (v > stop_deg + 1e-9) break;
    pts.push_back(v);
  }
  return pts;
}

std::string GridSpec::str() const {
  return fmt9(start_deg) + ":" + fmt9(stop_deg) + ":" + fmt9(step_deg);
}

std::string SweepConfig::echo() const {
  std::ostringstream out;
  out << "mmadoa " << to_string(experiment) << " model=" << model_path << " seed=" << seed
      << " k=" << num_snapshots << " trials=" << trials;
  out << " snr_db=";
  for (std::size_t i = 0; i < snr_db.size(); ++i) out << (i ? "," : "") << fmt9(snr_db[i]);
  out << " objectives=";
  for (std::size_t i = 0; i < objectives.size(); ++i)
    out << (i ? "," : "") << to_string(objectives[i]);
  out << " fovs_deg=";
  if (fovs.empty()) {
    out << "full";
  } else {
    for (std::size_t i = 0; i < fovs.size(); ++i) out << (i ? ";" : "") << fov_string_deg(fovs[i]);
  }
  out << " theta_grid_deg=" << theta_grid.str() << " phi_grid_deg=" << phi_grid.str();
  return out.str();
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open sweep config: " + path);
  SweepConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "experiment") {
      config.experiment = experiment_from_string(value);
    } else if (key == "model") {
      config.model_path = value;
    } else if (key == "seed") {
      config.seed = parse_u64(value, where);
    } else if (key == "k") {
      config.num_snapshots = static_cast<int>(parse_num(value, where));
    } else if (key == "trials") {
      config.trials = static_cast<int>(parse_num(value, where));
    } else if (key == "threads") {
      config.threads = static_cast<int>(parse_num(value, where));
    } else if (key == "snr_db") {
      config.snr_db.clear();
      for (const auto& tok : split_str(value, ',')) config.snr_db.push_back(parse_num(tok, where));
    } else if (key == "objective" || key == "objectives") {
      config.objectives.clear();
      for (const auto& tok : split_str(value, ','))
        config.objectives.push_back(objective_from_string(trim(tok)));
    } else if (key == "fov_deg" || key == "fovs_deg") {
      config.fovs.clear();
      for (const auto& tok : split_str(value, ';')) config.fovs.push_back(parse_fov_deg(tok));
    } else if (key == "phi_fov_deg") {
      const auto bounds = split_str(value, ':');
      if (bounds.size() != 2) throw ValidationError(where + ": phi_fov_deg must be 'lo:hi'");
      AngleInterval iv{deg2rad(parse_num(bounds[0], where)),
                       deg2rad(parse_num(bounds[1], where))};
      if (config.fovs.empty()) config.fovs.emplace_back();
      for (auto& fov : config.fovs) fov.phi = iv;
    } else if (key == "theta_grid_deg") {
      config.theta_grid = parse_grid(value, where);
    } else if (key == "phi_grid_deg") {
      config.phi_grid = parse_grid(value, where);
    } else if (key == "out") {
      config.output_path = value;
    } else {
      throw ValidationError(where + ": unknown key '" + key + "'");
    }
  }
  return config;
}

int SweepResult::col(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  throw ValidationError("no such result column: " + name);
}

double SweepResult::value(std::size_t row, const std::string& name) const {
  const std::string& cell = rows.at(row).at(col(name));
  if (cell == "inf") return kInf;
  return std::stod(cell);
}

SweepResult run_angle_sweep_2d(const SweepConfig& config, const PatternModel& model) {
  validate_common(config);
  require(model.is_2d(), "angle2d experiment needs a 2D model");
  require(config.objectives.size() == 1, "angle2d uses a single objective");
  require(config.fovs.size() <= 1, "angle2d uses a single field of view");

  const FieldOfView fov =
      config.fovs.empty() ? FieldOfView::full(model.basis()) : config.fovs[0];
  EstimatorConfig est_cfg;
  est_cfg.objective = config.objectives[0];
  est_cfg.fov = fov;
  const EstimationContext ctx(model, est_cfg);

  const auto truths = clip_grid(config.theta_grid, fov);
  require(!truths.empty(), "angle2d: no truth grid points inside the field of view");
  const int n_theta = static_cast<int>(config.theta_grid.points_deg().size());
  const int n_cells = static_cast<int>(config.snr_db.size() * truths.size());

  std::vector<CellOut> cells(n_cells);
  std::vector<double> crbs(n_cells);
  parallel_for(n_cells, config.threads, [&](int c) {
    const int si = c / static_cast<int>(truths.size());
    const int ti = c % static_cast<int>(truths.size());
    const double theta0 = truths[ti].second;
    const SignalParams truth{theta0, 0.0, std::pow(10.0, config.snr_db[si] / 10.0), 1.0};
    const FisherInfo info = fisher_information(model, truth, config.num_snapshots);
    crbs[c] = info.crb_theta;
    const std::uint64_t key =
        static_cast<std::uint64_t>(si) * n_theta + truths[ti].first;
    cells[c] = run_trials(model, ctx, truth, config.num_snapshots, config.trials, config.seed,
                          key, info.crb_theta, -1.0);
  });

  SweepResult result;
  result.header_comment = config.echo();
  result.columns = {"snr_db",  "theta_deg",      "rmse_deg",  "crb_sqrt_deg",
                    "trials",  "ambiguity_rate", "floor_rate"};
  for (int c = 0; c < n_cells; ++c) {
    const int si = c / static_cast<int>(truths.size());
    const int ti = c % static_cast<int>(truths.size());
    result.rows.push_back({fmt9(config.snr_db[si]), fmt9(rad2deg(truths[ti].second)),
                           fmt9(cells[c].rmse_theta_deg), fmt9(crb_sqrt_deg(crbs[c])),
                           std::to_string(config.trials), fmt9(cells[c].ambiguity_rate),
                           fmt9(cells[c].floor_rate)});
  }
  return result;
}

SweepResult run_snr_sweep_2d(const SweepConfig& config, const PatternModel& model) {
  validate_common(config);
  require(model.is_2d(), "snr2d experiment needs a 2D model");

  std::vector<FieldOfView> fovs = config.fovs;
  if (fovs.empty()) fovs.push_back(FieldOfView::full(model.basis()));

  struct Combo {
    Objective objective;
    int fov_index;
  };
  std::vector<Combo> combos;
  for (const Objective obj : config.objectives)
    for (int f = 0; f < static_cast<int>(fovs.size()); ++f) combos.push_back({obj, f});

  std::vector<EstimationContext> contexts;
  std::vector<std::vector<std::pair<int, double>>> truths(combos.size());
  contexts.reserve(combos.size());
  for (std::size_t i = 0; i < combos.size(); ++i) {
    EstimatorConfig est_cfg;
    est_cfg.objective = combos[i].objective;
    est_cfg.fov = fovs[combos[i].fov_index];
    contexts.emplace_back(model, est_cfg);
    truths[i] = clip_grid(config.theta_grid, fovs[combos[i].fov_index]);
    require(!truths[i].empty(), "snr2d: no truth grid points inside field of view " +
                                    fov_string_deg(fovs[combos[i].fov_index]));
  }

  const int n_theta = static_cast<int>(config.theta_grid.points_deg().size());
  struct Task {
    int combo, snr, point;
  };
  std::vector<Task> tasks;
  for (int ci = 0; ci < static_cast<int>(combos.size()); ++ci)
    for (int si = 0; si < static_cast<int>(config.snr_db.size()); ++si)
      for (int ti = 0; ti < static_cast<int>(truths[ci].size()); ++ti)
        tasks.push_back({ci, si, ti});

  struct PointOut {
    CellOut cell;
    double crb = 0.0;
  };
  std::vector<PointOut> outs(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), config.threads, [&](int t) {
    const Task& task = tasks[t];
    const auto& [grid_index, theta0] = truths[task.combo][task.point];
    const SignalParams truth{theta0, 0.0, std::pow(10.0, config.snr_db[task.snr] / 10.0), 1.0};
    const FisherInfo info = fisher_information(model, truth, config.num_snapshots);
    // stream key excludes the combo so estimator variants see paired draws
    const std::uint64_t key =
        static_cast<std::uint64_t>(task.snr) * n_theta + grid_index;
    outs[t].crb = info.crb_theta;
    outs[t].cell = run_trials(model, contexts[task.combo], truth, config.num_snapshots,
                              config.trials, config.seed, key, info.crb_theta, -1.0);
  });

  SweepResult result;
  result.header_comment = config.echo();
  result.columns = {"snr_db",  "objective",      "fov_deg",   "rmse_deg", "crb_sqrt_deg",
                    "trials",  "ambiguity_rate", "floor_rate"};
  for (int ci = 0; ci < static_cast<int>(combos.size()); ++ci) {
    for (int si = 0; si < static_cast<int>(config.snr_db.size()); ++si) {
      double rmse = 0.0, crb = 0.0, amb = 0.0, floor = 0.0;
      int n = 0;
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (tasks[t].combo != ci || tasks[t].snr != si) continue;
        rmse += outs[t].cell.rmse_theta_deg;
        crb += crb_sqrt_deg(outs[t].crb);
        amb += outs[t].cell.ambiguity_rate;
        floor += outs[t].cell.floor_rate;
        ++n;
      }
      result.rows.push_back({fmt9(config.snr_db[si]), to_string(combos[ci].objective),
                             fov_string_deg(fovs[combos[ci].fov_index]), fmt9(rmse / n),
                             fmt9(crb / n), std::to_string(config.trials), fmt9(amb / n),
                             fmt9(floor / n)});
    }
  }
  return result;
}

SweepResult run_map_3d(const SweepConfig& config, const PatternModel& model) {
  validate_common(config);
  require(!model.is_2d(), "map3d experiment needs a 3D model");
  require(config.objectives.size() == 1, "map3d uses a single objective");
  require(config.fovs.size() <= 1, "map3d uses a single field of view");

  const FieldOfView fov =
      config.fovs.empty() ? FieldOfView::full(model.basis()) : config.fovs[0];
  EstimatorConfig est_cfg;
  est_cfg.objective = config.objectives[0];
  est_cfg.fov = fov;
  const EstimationContext ctx(model, est_cfg);

  std::vector<double> thetas;
  for (double deg : config.theta_grid.points_deg()) {
    const double t = std::clamp(deg2rad(deg), kPoleGuard, kPi - kPoleGuard);
    if (thetas.empty() || t > thetas.back() + 1e-12) thetas.push_back(t);
  }
  std::vector<double> phis;
  for (double deg : config.phi_grid.points_deg()) phis.push_back(deg2rad(deg));
  require(!thetas.empty() && !phis.empty(), "map3d: empty angle grid");

  const int n_phi = static_cast<int>(phis.size());
  const int n_cells =
      static_cast<int>(config.snr_db.size()) * static_cast<int>(thetas.size()) * n_phi;

  struct MapOut {
    CellOut cell;
    double crb_theta = 0.0, crb_phi = 0.0;
  };
  std::vector<MapOut> outs(n_cells);
  parallel_for(n_cells, config.threads, [&](int c) {
    const int per_snr = static_cast<int>(thetas.size()) * n_phi;
    const int si = c / per_snr;
    const int ti = (c % per_snr) / n_phi;
    const int pi = c % n_phi;
    const SignalParams truth{thetas[ti], phis[pi],
                             std::pow(10.0, config.snr_db[si] / 10.0), 1.0};
    const FisherInfo info = fisher_information(model, truth, config.num_snapshots);
    outs[c].crb_theta = info.crb_theta;
    outs[c].crb_phi = info.crb_phi.value_or(kInf);
    outs[c].cell = run_trials(model, ctx, truth, config.num_snapshots, config.trials,
                              config.seed, static_cast<std::uint64_t>(c), info.crb_theta,
                              outs[c].crb_phi);
  });

  SweepResult result;
  result.header_comment = config.echo();
  result.columns = {"snr_db",          "theta_deg",        "phi_deg",
                    "rmse_theta_deg",  "rmse_phi_deg",     "rmse_gc_deg",
                    "crb_sqrt_theta_deg", "crb_sqrt_phi_deg", "trials",
                    "ambiguity_rate",  "floor_rate"};
  for (int c = 0; c < n_cells; ++c) {
    const int per_snr = static_cast<int>(thetas.size()) * n_phi;
    const int si = c / per_snr;
    const int ti = (c % per_snr) / n_phi;
    const int pi = c % n_phi;
    result.rows.push_back(
        {fmt9(config.snr_db[si]), fmt9(rad2deg(thetas[ti])), fmt9(rad2deg(phis[pi])),
         fmt9(outs[c].cell.rmse_theta_deg), fmt9(outs[c].cell.rmse_phi_deg),
         fmt9(outs[c].cell.rmse_gc_deg), fmt9(crb_sqrt_deg(outs[c].crb_theta)),
         fmt9(crb_sqrt_deg(outs[c].crb_phi)), std::to_string(config.trials),
         fmt9(outs[c].cell.ambiguity_rate), fmt9(outs[c].cell.floor_rate)});
  }
  return result;
}

SweepResult run_crb_only(const SweepConfig& config, const PatternModel& model) {
  require(config.num_snapshots >= 1, "sweep config: k must be >= 1");
  require(!config.snr_db.empty(), "sweep config: snr_db list is empty");

  std::vector<std::pair<double, double>> grid;
  if (model.is_2d()) {
    for (double deg : config.theta_grid.points_deg()) grid.emplace_back(deg2rad(deg), 0.0);
  } else {
    std::vector<double> thetas;
    for (double tdeg : config.theta_grid.points_deg()) {
      const double t = std::clamp(deg2rad(tdeg), kPoleGuard, kPi - kPoleGuard);
      if (thetas.empty() || t > thetas.back() + 1e-12) thetas.push_back(t);
    }
    for (double t : thetas)
      for (double pdeg : config.phi_grid.points_deg()) grid.emplace_back(t, deg2rad(pdeg));
  }
  require(!grid.empty(), "crb: empty angle grid");

  SweepResult result;
  result.header_comment = config.echo();
  if (model.is_2d())
    result.columns = {"snr_db", "theta_deg", "crb_sqrt_deg", "pinv", "floor_active"};
  else
    result.columns = {"snr_db",        "theta_deg",          "phi_deg",
                      "crb_sqrt_theta_deg", "crb_sqrt_phi_deg", "pinv", "floor_active"};

  for (double snr : config.snr_db) {
    const double ps = std::pow(10.0, snr / 10.0);
    const auto points = crb_sweep(model, ps, 1.0, config.num_snapshots, grid);
    for (const auto& pt : points) {
      if (model.is_2d())
        result.rows.push_back({fmt9(snr), fmt9(rad2deg(pt.theta)),
                               fmt9(crb_sqrt_deg(pt.crb_theta)),
                               pt.pseudo_inverse ? "1" : "0", pt.floor_active ? "1" : "0"});
      else
        result.rows.push_back({fmt9(snr), fmt9(rad2deg(pt.theta)), fmt9(rad2deg(pt.phi)),
                               fmt9(crb_sqrt_deg(pt.crb_theta)),
                               fmt9(crb_sqrt_deg(pt.crb_phi.value_or(kInf))),
                               pt.pseudo_inverse ? "1" : "0", pt.floor_active ? "1" : "0"});
    }
  }
  return result;
}

SweepResult run_sweep(const SweepConfig& config, const PatternModel& model) {
  switch (config.experiment) {
    case Experiment::AngleSweep2D: return run_angle_sweep_2d(config, model);
    case Experiment::SnrSweep2D: return run_snr_sweep_2d(config, model);
    case Experiment::Map3D: return run_map_3d(config, model);
    case Experiment::CrbOnly: return run_crb_only(config, model);
  }
  throw ValidationError("unknown experiment");
}

void write_sweep_csv(const std::string& path, const SweepResult& result) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write result file: " + path);
  out << "# " << result.header_comment << "\n";
  for (std::size_t i = 0; i < result.columns.size(); ++i)
    out << (i ? "," : "") << result.columns[i];
  out << "\n";
  for (const auto& row : result.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  if (!out) throw ValidationError("write failed: " + path);
}

void save_measurement(const std::string& path, const PowerMeasurement& meas,
                      const std::string& extra_meta) {
  meas.validate();
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write measurement file: " + path);
  out << "# mmadoa-measurement k=" << meas.num_snapshots;
  if (!extra_meta.empty()) out << ' ' << extra_meta;
  out << "\nport,power\n";
  for (Eigen::Index m = 0; m < meas.port_powers.size(); ++m)
    out << (m + 1) << ',' << fmt17(meas.port_powers[m]) << "\n";
  if (!out) throw ValidationError("write failed: " + path);
}

PowerMeasurement load_measurement(const std::string& path, int k_override) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open measurement file: " + path);
  std::string line;
  int k = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string tok;
      while (meta >> tok)
        if (tok.rfind("k=", 0) == 0) k = static_cast<int>(parse_num(tok.substr(2), path));
      continue;
    }
    break;
  }
  if (line != "port,power")
    throw ValidationError(path + ": expected header 'port,power'");
  std::vector<double> powers;
  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const std::string where = path + ": row " + std::to_string(row);
    const auto tokens = split_str(line, ',');
    if (tokens.size() != 2) throw ValidationError(where + ": expected 'port,power'");
    if (static_cast<int>(parse_num(tokens[0], where)) != row)
      throw ValidationError(where + ": ports must be consecutive starting at 1");
    powers.push_back(parse_num(tokens[1], where));
  }
  if (k_override > 0) k = k_override;
  if (k < 1)
    throw ValidationError(path + ": snapshot count missing from metadata; pass --k");
  PowerMeasurement meas;
  meas.port_powers = Eigen::Map<Eigen::VectorXd>(powers.data(), powers.size());
  meas.num_snapshots = k;
  meas.validate();
  return meas;
}

}  // namespace mmadoa
