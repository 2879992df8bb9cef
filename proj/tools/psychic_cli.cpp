// Copyright 2026 The Psychic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// psychic: command-line front end.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "psychic/artifacts.hpp"
#include "psychic/config.hpp"
#include "psychic/error.hpp"
#include "psychic/eval_harness.hpp"
#include "psychic/goal_engine.hpp"
#include "psychic/km_estimator.hpp"
#include "psychic/reachability.hpp"
#include "psychic/sde_simulator.hpp"
#include "psychic/serialization.hpp"
#include "psychic/sindy.hpp"
#include "psychic/trajectory.hpp"

namespace fs = std::filesystem;
using namespace psychic;

namespace {

// Bad flag values: reported like parse errors, exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Globals {
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  std::string out;
};

// Flags that override RunConfig fields. Unset flags keep the config value.
struct RunFlags {
  std::string config_path;
  std::optional<Index> window;
  std::optional<std::string> library;
  std::optional<double> epsilon_ssr;
  std::optional<double> contamination;
  std::optional<double> temperature;
  std::optional<std::vector<double>> xi;
  std::optional<double> direction_deadband;
  std::optional<double> switch_threshold;
  std::optional<Index> grid_cells;
  std::optional<std::vector<double>> slices;
  std::optional<Index> warmup;
  std::optional<int> starts;
  bool relax_mu_beta = false;
  bool normalize_mixture = false;
};

enum FlagSet : unsigned {
  kGoalFlags = 1u << 0,
  kSindyFlags = 1u << 1,
  kNllFlags = 1u << 2,
  kGridFlags = 1u << 3,
  kReachFlags = 1u << 4,
  kOnlineFlags = 1u << 5,
};

void add_run_flags(CLI::App* app, RunFlags& f, unsigned sets) {
  app->add_option("--config", f.config_path, "run settings JSON (keys as in the defaults table)");
  if (sets & kGoalFlags) {
    app->add_option("--window", f.window, "odd score window W in samples (default 21)");
    app->add_option("--contamination", f.contamination, "ECOD contamination q in (0, 0.5) (default 0.05)");
    app->add_option("--temperature", f.temperature, "goal softmax temperature T_w in m; 0 = mean goal distance");
    app->add_option("--xi", f.xi, "goal-dynamics weights, 3 + K values")->delimiter(',');
    app->add_option("--direction-deadband", f.direction_deadband, "M1 deadband for v_dir in m/s (default 0.05)");
    app->add_option("--switch-threshold", f.switch_threshold, "disc-mode switch distance in m (default 0.01)");
  }
  if (sets & kSindyFlags) {
    app->add_option("--library", f.library, "regression library: default2 or default1");
    app->add_option("--epsilon-ssr", f.epsilon_ssr, "SSR tolerance eps in [0, 10] (default 0.1)");
    app->add_flag("--relax-mu-beta", f.relax_mu_beta, "fit mu_beta from the third moment");
  }
  if (sets & kNllFlags) app->add_option("--starts", f.starts, "likelihood-fit multi-starts in [1, 64] (default 8)");
  if (sets & kGridFlags) app->add_option("--grid-cells", f.grid_cells, "MAP grid cells (default 201)");
  if (sets & kReachFlags) {
    app->add_option("--slices", f.slices, "slice times in s (default 0.5,1,2,4,8)")->delimiter(',');
    app->add_flag("--normalize-mixture", f.normalize_mixture, "divide the goal mixture by K");
  }
  if (sets & kOnlineFlags) app->add_option("--warmup", f.warmup, "samples before the first online prediction (>= 21)");
}

// "invalid value for 'epsilon_ssr'" -> "invalid value for --epsilon-ssr".
std::string flag_message(std::string msg) {
  const std::string key_start = "for '";
  const auto a = msg.find(key_start);
  if (a == std::string::npos) return msg;
  const auto b = msg.find('\'', a + key_start.size());
  if (b == std::string::npos) return msg;
  std::string key = msg.substr(a + key_start.size(), b - a - key_start.size());
  std::replace(key.begin(), key.end(), '_', '-');
  return msg.substr(0, a) + "for --" + key + msg.substr(b + 1);
}

std::uint64_t resolve_seed(const Globals& g, std::uint64_t fallback) {
  if (g.seed) return *g.seed;
  if (const char* env = std::getenv("PSYCHIC_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw UsageError("invalid value for PSYCHIC_SEED: must be a non-negative integer");
    }
  }
  return fallback;
}

RunConfig build_config(const RunFlags& f, const Globals& g) {
  RunConfig c;
  try {
    if (!f.config_path.empty()) c = RunConfig::from_json(read_json_file(f.config_path));
    if (f.window) c.window = *f.window;
    if (f.library) c.library = *f.library;
    if (f.epsilon_ssr) c.epsilon_ssr = *f.epsilon_ssr;
    if (f.contamination) c.contamination = *f.contamination;
    if (f.temperature) c.temperature = *f.temperature;
    if (f.xi) c.xi = *f.xi;
    if (f.direction_deadband) c.direction_deadband = *f.direction_deadband;
    if (f.switch_threshold) c.switch_threshold = *f.switch_threshold;
    if (f.grid_cells) c.grid_cells = *f.grid_cells;
    if (f.slices) c.slices = *f.slices;
    if (f.warmup) c.warmup = *f.warmup;
    if (f.starts) c.starts = *f.starts;
    if (f.relax_mu_beta) c.relax_mu_beta = true;
    if (f.normalize_mixture) c.normalize_mixture = true;
    c.seed = resolve_seed(g, c.seed);
    c.validate();
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(flag_message(e.what()));
  }
  return c;
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty() || g.out == "-") {
    std::cout << text;
  } else {
    write_text_file(g.out, text);
  }
}

void note(const Globals& g, const std::string& msg) {
  if (!g.quiet) std::cerr << msg << '\n';
}

std::string meta(const std::string& subcommand, const RunConfig& c, nlohmann::json inputs = nlohmann::json::object()) {
  return metadata_comment({{"subcommand", subcommand}, {"config", c.to_json()}, {"inputs", inputs}}, c.seed);
}

Eigen::VectorXd parse_vector(const std::string& text, const std::string& flag) {
  std::vector<double> v;
  for (const std::string& cell : split_csv_line(text)) {
    double x = 0.0;
    if (!parse_double(cell, x) || !std::isfinite(x)) throw UsageError("invalid value for " + flag + ": '" + text + "'");
    v.push_back(x);
  }
  if (v.empty()) throw UsageError("invalid value for " + flag + ": empty");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

GoalSet maybe_goals(const std::string& path) { return path.empty() ? GoalSet{} : load_goals_file(path); }

Index goal_index(const GoalSet& goals, const std::string& name) {
  for (Index k = 0; k < goals.size(); ++k) {
    if (goals[k].label == name) return k;
  }
  double v = 0.0;
  if (parse_double(name, v) && v >= 0 && v == std::floor(v) && v < static_cast<double>(goals.size())) {
    return static_cast<Index>(v);
  }
  throw UsageError("invalid value for --goal: unknown goal '" + name + "'");
}

// ---- subcommands ------------------------------------------------------------

struct SimulateArgs {
  std::string config, truth, goals_out;
};

int run_simulate(const SimulateArgs& a, const Globals& g) {
  const nlohmann::json j = read_json_file(a.config);
  GoalSet goals;
  SimConfig sc = sim_config_from_json(j, &goals);
  sc.seed = resolve_seed(g, sc.seed);
  const SimResult r = simulate(sc, goals);
  std::ostringstream os;
  write_trajectory(os, r.trajectory);
  emit(g, os.str());
  if (!a.truth.empty()) write_text_file(a.truth, truth_to_json(r, sc.seed).dump(2) + "\n");
  if (!a.goals_out.empty()) {
    std::ostringstream gs;
    write_goals(gs, goals);
    write_text_file(a.goals_out, gs.str());
  }
  note(g, "simulated " + std::to_string(r.trajectory.size()) + " samples, " + std::to_string(r.jumps.size()) +
              " jumps, seed " + std::to_string(sc.seed));
  return 0;
}

struct KmArgs {
  std::string traj;
  Index dim = 0;
  Index window = kDefaultKmWindow;
  std::string moments = "cumulant";
};

int run_km(const KmArgs& a, const Globals& g) {
  if (a.window < 1 || a.window % 2 == 0) {
    throw UsageError("invalid value for --window: must be odd and >= 1 (window must be odd)");
  }
  JumpMoments mode;
  if (a.moments == "cumulant") mode = JumpMoments::cumulant;
  else if (a.moments == "literal") mode = JumpMoments::literal;
  else throw UsageError("invalid value for --moments: must be cumulant or literal");
  const Trajectory traj = load_trajectory_file(a.traj);
  if (a.dim < 0 || a.dim >= traj.dims()) throw UsageError("invalid value for --dim: out of range");
  const KMSeries kms = estimate_km(traj, a.dim, a.window, mode);
  RunConfig c;
  c.seed = resolve_seed(g, 0);
  std::ostringstream os;
  write_km_csv(os, kms, traj.times()(0),
               meta("km", c, {{"traj", a.traj}, {"dim", a.dim}, {"window", a.window}, {"moments", a.moments}}));
  emit(g, os.str());
  return 0;
}

struct FitNllArgs {
  std::string traj, goals, labels;
  std::string mode = "nn";
};

int run_fit_nll(const FitNllArgs& a, const RunConfig& c, const Globals& g) {
  const Trajectory traj = load_trajectory_file(a.traj);
  const GoalSet goals = maybe_goals(a.goals);
  const HarnessConfig h = c.harness();
  GoalTrace trace;
  if (!a.labels.empty()) {
    if (goals.empty()) throw UsageError("--labels needs --goals");
    std::ifstream in(a.labels);
    if (!in) throw Error("cannot open labels '" + a.labels + "'");
    trace.labels = read_labels_csv(in, goals);
    const auto n = static_cast<std::size_t>(traj.size());
    if (trace.labels.size() != n && trace.labels.size() + 1 != n) {
      throw Error("labels: expected one row per sample or per transition");
    }
  } else if (!goals.empty()) {
    trace = infer_goal_trace(traj, goals, parse_goal_mode(a.mode), h.goal);
  }
  const NllModel model = fit_nll_model(traj, trace, goals, h.nll);
  nlohmann::json j = nll_model_json(model, goals, traj.dt(), c.starts);
  j["config"] = c.to_json();
  j["seed"] = c.seed;
  emit(g, j.dump(2) + "\n");
  if (model.fallbacks) note(g, std::to_string(model.fallbacks) + " goal/dimension fits used the pooled data");
  return 0;
}

struct FitSindyArgs {
  std::string traj, gtrace;
};

int run_fit_sindy(const FitSindyArgs& a, const RunConfig& c, const Globals& g) {
  const Trajectory traj = load_trajectory_file(a.traj);
  GoalTrace trace;
  if (!a.gtrace.empty()) {
    const GoalTraceTable t = read_goal_trace_file(a.gtrace);
    if (t.g.rows() != traj.size() || t.g.cols() != traj.dims()) {
      throw Error("goal trace shape does not match the trajectory");
    }
    trace.g = t.g;
  } else {
    // Without a goal trace the goal is the current state.
    trace.g = traj.positions();
  }
  const std::vector<KmModels> models = fit_sindy_model(traj, trace, c.harness());
  nlohmann::json j = sindy_model_json(models, c.library, traj.dt());
  j["config"] = c.to_json();
  j["seed"] = c.seed;
  emit(g, j.dump(2) + "\n");
  return 0;
}

struct InferArgs {
  std::string traj, goals;
  std::string mode = "nn";
};

std::string goal_trace_text(const InferArgs& a, const RunConfig& c, const std::string& subcommand) {
  const Trajectory traj = load_trajectory_file(a.traj);
  const GoalSet goals = maybe_goals(a.goals);
  const GoalTrace trace = infer_goal_trace(traj, goals, parse_goal_mode(a.mode), c.harness().goal);
  std::ostringstream os;
  write_goal_trace_csv(os, traj, trace,
                       meta(subcommand, c, {{"traj", a.traj}, {"goals", a.goals}, {"mode", a.mode}}));
  return os.str();
}

struct PredictArgs {
  std::string model, goals, x0, g, goal;
  double tau = 0.0;
};

int run_predict(const PredictArgs& a, const RunConfig& c, const Globals& g) {
  const ModelFile m = load_model_file(a.model);
  const GoalSet goals = maybe_goals(a.goals);
  const Eigen::VectorXd x0 = parse_vector(a.x0, "--x0");
  const double tau = a.tau > 0.0 ? a.tau : m.dt;
  std::vector<JumpDiffusionParams> params;
  std::string used_goal;
  if (m.kind == ModelKind::nll) {
    Index k = 0;
    if (!a.goal.empty()) {
      k = -1;
      for (std::size_t i = 0; i < m.labels.size(); ++i) {
        if (m.labels[i] == a.goal) k = static_cast<Index>(i);
      }
      if (k < 0) throw UsageError("invalid value for --goal: not in the model");
    }
    params = model_params(m, x0, GoalSet{})[static_cast<std::size_t>(k)];
    used_goal = m.labels[static_cast<std::size_t>(k)];
  } else {
    Eigen::VectorXd gv = x0;
    if (!a.g.empty()) {
      gv = parse_vector(a.g, "--g");
    } else if (!a.goal.empty()) {
      if (goals.empty()) throw UsageError("--goal needs --goals for a regression model");
      const Index k = goal_index(goals, a.goal);
      gv = goals[k].position;
      used_goal = goals[k].label;
    }
    if (gv.size() != m.dims) throw UsageError("invalid value for --g: dimension mismatch");
    params = model_params(m, x0, GoalSet({Goal{"g", gv}}))[0];
  }
  if (x0.size() != m.dims) throw UsageError("invalid value for --x0: dimension mismatch");
  nlohmann::json dims = nlohmann::json::array();
  for (Index d = 0; d < m.dims; ++d) {
    const JumpDiffusionParams& p = params[static_cast<std::size_t>(d)];
    const StateGrid grid = default_grid(p, x0(d), tau, c.grid_cells);
    const MapPrediction mp = map_predict(p, x0(d), tau, grid);
    const PredictiveInterval pi = predictive_interval(p, x0(d), tau, mp.grid);
    dims.push_back({{"dim", d},
                    {"x_s", x0(d)},
                    {"x_t", mp.x_t},
                    {"log_density", mp.log_density},
                    {"interval", {pi.lo, pi.hi}},
                    {"grid_expanded", mp.expanded},
                    {"params",
                     {{"mu_g", p.mu_g}, {"sigma_g", p.sigma_g}, {"lambda", p.lambda}, {"mu_beta", p.mu_beta},
                      {"sigma_beta", p.sigma_beta}}}});
  }
  nlohmann::json j = {{"tau", tau}, {"model", m.kind == ModelKind::nll ? "nll" : "sindy"}, {"dims", dims}};
  if (!used_goal.empty()) j["goal"] = used_goal;
  emit(g, j.dump(2) + "\n");
  return 0;
}

struct ReachArgs {
  std::string model, goals, x0;
  Index cells = 0;
  std::vector<double> weights;
};

ReachabilityGrid build_reach(const ReachArgs& a, const RunConfig& c, std::vector<double> slices) {
  const ModelFile m = load_model_file(a.model);
  const GoalSet goals = maybe_goals(a.goals);
  const Eigen::VectorXd x0 = parse_vector(a.x0, "--x0");
  const ReachParams params = model_params(m, x0, goals);
  // Text output keeps 3-D grids to a few MB by default.
  static const Index kDefaultCells[] = {201, 201, 101, 41};
  const Index cells = a.cells > 0 ? a.cells : kDefaultCells[std::min<Index>(m.dims, 3)];
  if (cells < 3) throw UsageError("invalid value for --cells: must be >= 3");
  const GridSpec spec = default_grid_spec(params, x0, std::move(slices), cells);
  ReachOptions opts;
  opts.weights = a.weights;
  opts.normalize = c.normalize_mixture;
  return reach_grid(params, x0, spec, opts);
}

int run_reach(const ReachArgs& a, const RunConfig& c, const Globals& g) {
  const ReachabilityGrid grid = build_reach(a, c, c.slices);
  std::ostringstream os;
  write_reach_csv(os, grid, meta("reach", c, {{"model", a.model}, {"goals", a.goals}, {"x0", a.x0}}));
  emit(g, os.str());
  return 0;
}

struct PlaybackArgs {
  std::string traj, goals;
  std::string strategy = "sindy-det";
  std::string mode = "online";
  bool intervals = false;
};

int run_playback(const PlaybackArgs& a, const RunConfig& c, const Globals& g) {
  const Trajectory traj = load_trajectory_file(a.traj);
  const GoalSet goals = maybe_goals(a.goals);
  HarnessConfig h = c.harness();
  h.record_intervals = a.intervals;
  const StrategyId s = parse_strategy(a.strategy);
  const RunMode mode = parse_run_mode(a.mode);
  const StrategyRun run = mode == RunMode::offline ? run_offline(traj, goals, s, h) : run_online(traj, goals, s, h);
  nlohmann::json j = run_json(run, traj);
  j["config"] = c.to_json();
  j["seed"] = c.seed;
  emit(g, j.dump(2) + "\n");
  note(g, s.name() + " " + to_string(mode) + ": rss " + format_double(run.rss) + " over " +
              std::to_string(run.steps()) + " steps");
  return 0;
}

struct EvalArgs {
  std::string dir, goals, csv, table;
  std::vector<std::string> strategies = {"all"};
  std::vector<std::string> modes = {"offline", "online"};
  int threads = 0;
};

// Trajectory CSVs under dir, sorted. The scenario is the parent directory
// relative to dir ("." for files at the top). Goals come from --goals, else
// goals.json beside the trajectory, else none.
std::vector<EvalInput> collect_inputs(const EvalArgs& a) {
  if (!fs::is_directory(a.dir)) throw UsageError("invalid value for --dir: not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a.dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("eval: no .csv trajectories under " + a.dir);
  const GoalSet shared = maybe_goals(a.goals);
  std::vector<EvalInput> inputs;
  for (const fs::path& p : files) {
    const std::string parent = fs::relative(p.parent_path(), a.dir).generic_string();
    GoalSet goals = shared;
    if (a.goals.empty() && fs::exists(p.parent_path() / "goals.json")) {
      goals = load_goals_file((p.parent_path() / "goals.json").string());
    }
    inputs.push_back(EvalInput{fs::relative(p, a.dir).generic_string(), parent.empty() ? "." : parent,
                               load_trajectory_file(p.string()), std::move(goals)});
  }
  return inputs;
}

int run_eval(const EvalArgs& a, const RunConfig& c, const Globals& g) {
  std::vector<StrategyId> strategies;
  for (const std::string& s : a.strategies) {
    if (s == "all") {
      for (const StrategyId& id : all_strategies()) strategies.push_back(id);
    } else {
      strategies.push_back(parse_strategy(s));
    }
  }
  std::vector<RunMode> modes;
  for (const std::string& m : a.modes) modes.push_back(parse_run_mode(m));
  const std::vector<EvalInput> inputs = collect_inputs(a);
  const EvalReport report = run_matrix(inputs, strategies, modes, c.harness(), a.threads);
  nlohmann::json j = report_json(report);
  j["config"] = c.to_json();
  j["seed"] = c.seed;
  emit(g, j.dump(2) + "\n");
  if (!a.csv.empty()) write_text_file(a.csv, meta("eval", c, {{"dir", a.dir}}) + "\n" + table_report_csv(report));
  if (!a.table.empty()) write_text_file(a.table, table_report_text(report));
  if (!g.out.empty() && g.out != "-" && !g.quiet) std::cerr << table_report_text(report);
  if (!report.all_ok()) {
    for (const EvalCell& cell : report.cells) {
      if (!cell.ok) {
        std::cerr << "failed: " << cell.trajectory << " " << cell.strategy.name() << " " << to_string(cell.mode)
                  << ": " << cell.error << '\n';
      }
    }
    return 1;
  }
  return 0;
}

struct PlotArgs {
  std::string kind;
  std::vector<std::string> models;
  std::vector<std::string> params;
  std::string x0, goals, goal, traj, km, mode = "det";
  double tau = 0.0;
  Index points = 2001;
  double t = 1.0;
  std::vector<Index> plane = {0, 1};
  Index cells = 0;
};

int run_plotdata(const PlotArgs& a, const RunConfig& c, const Globals& g) {
  std::ostringstream os;
  if (a.kind == "pdf-curve") {
    if (a.x0.empty()) throw UsageError("pdf-curve needs --x0");
    const Eigen::VectorXd x0 = parse_vector(a.x0, "--x0");
    if (x0.size() != 1) throw UsageError("invalid value for --x0: pdf-curve is one-dimensional");
    std::vector<PdfCurve> curves;
    double tau = a.tau;
    const GoalSet goals = maybe_goals(a.goals);
    for (const std::string& path : a.models) {
      const ModelFile m = load_model_file(path);
      if (m.dims != 1) throw Error("pdf-curve: model '" + path + "' is not one-dimensional");
      if (!(tau > 0.0)) tau = m.dt;
      const ReachParams rp = model_params(m, x0, goals);
      Index k = 0;
      if (!a.goal.empty()) {
        k = m.kind == ModelKind::nll
                ? static_cast<Index>(std::find(m.labels.begin(), m.labels.end(), a.goal) - m.labels.begin())
                : goal_index(goals, a.goal);
        if (k >= static_cast<Index>(rp.size())) throw UsageError("invalid value for --goal: not in the model");
      }
      curves.push_back({m.kind == ModelKind::nll ? "nll" : "sindy", rp[static_cast<std::size_t>(k)][0]});
    }
    for (const std::string& text : a.params) {
      const Eigen::VectorXd v = parse_vector(text, "--params");
      if (v.size() != 5) throw UsageError("invalid value for --params: expected mu_g,sigma_g,lambda,mu_beta,sigma_beta");
      curves.push_back({"params" + std::to_string(curves.size()), {v(0), v(1), v(2), v(3), v(4)}});
    }
    if (curves.empty()) throw UsageError("pdf-curve needs --model or --params");
    if (!(tau > 0.0)) throw UsageError("pdf-curve needs --tau with --params");
    write_pdf_curve_csv(os, curves, x0(0), tau, a.points,
                        meta("plotdata", c, {{"kind", a.kind}, {"models", a.models}, {"params", a.params}}));
  } else if (a.kind == "jump-markers") {
    std::vector<KMSeries> raw;
    double t0 = 0.0;
    if (!a.km.empty()) {
      std::ifstream in(a.km);
      if (!in) throw Error("cannot open km table '" + a.km + "'");
      raw.push_back(read_km_csv(in));
      std::ifstream again(a.km);
      t0 = read_csv(again).numeric_column("t").front();
    } else if (!a.traj.empty()) {
      const Trajectory traj = load_trajectory_file(a.traj);
      t0 = traj.times()(0);
      for (Index d = 0; d < traj.dims(); ++d) raw.push_back(raw_moments(increments(traj, d)));
    } else {
      throw UsageError("jump-markers needs --km or --traj");
    }
    write_jump_markers_csv(os, raw, t0, c.window, c.contamination,
                           meta("plotdata", c, {{"kind", a.kind}, {"km", a.km}, {"traj", a.traj}}));
  } else if (a.kind == "goal-trace") {
    if (a.traj.empty()) throw UsageError("goal-trace needs --traj");
    os << goal_trace_text(InferArgs{a.traj, a.goals, a.mode}, c, "plotdata");
  } else if (a.kind == "reach-slice") {
    if (a.models.size() != 1) throw UsageError("reach-slice needs exactly one --model");
    if (a.plane.size() != 2) throw UsageError("invalid value for --plane: expected two dimensions");
    ReachArgs ra{a.models.front(), a.goals, a.x0, a.cells, {}};
    const ReachabilityGrid grid = build_reach(ra, c, {a.t});
    write_reach_slice_csv(os, slice_export(grid, a.t, a.plane[0], a.plane[1]),
                          meta("plotdata", c, {{"kind", a.kind}, {"model", a.models.front()}, {"x0", a.x0}, {"t", a.t}}));
  } else {
    throw UsageError("invalid value for kind: must be pdf-curve, jump-markers, goal-trace or reach-slice");
  }
  emit(g, os.str());
  return 0;
}

std::string defaults_footer() {
  std::ostringstream os;
  os << "\nDefaults (run settings JSON keys):\n";
  for (const DefaultEntry& e : defaults_table()) {
    os << "  " << e.key << " = " << e.value << "  " << e.meaning << '\n';
  }
  os << "\nPSYCHIC_SEED sets the seed when --seed is absent.\n";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"psychic: jump-diffusion goal inference, prediction and reachability", "psychic"};
  app.footer(defaults_footer());
  app.fallthrough();
  Globals globals;
  app.add_option("--seed", globals.seed, "seed for every stochastic choice (overrides PSYCHIC_SEED)");
  app.add_flag("--quiet", globals.quiet, "suppress progress messages");
  app.add_option("--out", globals.out, "output file (stdout when absent)");

  RunFlags rf;

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "simulate a jump-drift-diffusion trajectory");
  simulate->add_option("--config", sim.config, "simulation JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--truth", sim.truth, "write jump events and the active-goal track here");
  simulate->add_option("--goals-out", sim.goals_out, "write the goal set here");

  KmArgs km;
  CLI::App* kmc = app.add_subcommand("km", "per-timestep Kramers-Moyal moments and implied parameters");
  kmc->add_option("--traj", km.traj, "trajectory CSV")->required()->check(CLI::ExistingFile);
  kmc->add_option("--dim", km.dim, "dimension index (default 0)");
  kmc->add_option("--window", km.window, "odd smoothing window in samples (default 21)");
  kmc->add_option("--moments", km.moments, "cumulant or literal (default cumulant)");

  FitNllArgs nll;
  CLI::App* fit_nll = app.add_subcommand("fit-nll", "maximum-likelihood jump-diffusion fit per goal");
  fit_nll->add_option("--traj", nll.traj, "trajectory CSV")->required()->check(CLI::ExistingFile);
  fit_nll->add_option("--goals", nll.goals, "goal set JSON")->check(CLI::ExistingFile);
  fit_nll->add_option("--labels", nll.labels, "CSV with a `label` column per sample or transition")
      ->check(CLI::ExistingFile);
  fit_nll->add_option("--mode", nll.mode, "goal mode used to label transitions without --labels (nn|det|disc)");
  add_run_flags(fit_nll, rf, kGoalFlags | kNllFlags);

  FitSindyArgs sindy;
  CLI::App* fit_sindy = app.add_subcommand("fit-sindy", "sparse regression of the KM moments on (X, g)");
  fit_sindy->add_option("--traj", sindy.traj, "trajectory CSV")->required()->check(CLI::ExistingFile);
  fit_sindy->add_option("--goal-trace", sindy.gtrace, "goal trace CSV from infer-goals")->check(CLI::ExistingFile);
  add_run_flags(fit_sindy, rf, kSindyFlags);

  InferArgs infer;
  CLI::App* infer_goals = app.add_subcommand("infer-goals", "goal trace with settled/move/jump scores");
  infer_goals->add_option("--traj", infer.traj, "trajectory CSV")->required()->check(CLI::ExistingFile);
  infer_goals->add_option("--goals", infer.goals, "goal set JSON")->check(CLI::ExistingFile);
  infer_goals->add_option("--mode", infer.mode, "nn, det or disc (default nn)");
  add_run_flags(infer_goals, rf, kGoalFlags);

  PredictArgs pred;
  CLI::App* predict = app.add_subcommand("predict", "MAP prediction and 95% interval from a fitted model");
  predict->add_option("--model", pred.model, "model.json or sindy.json")->required()->check(CLI::ExistingFile);
  predict->add_option("--x0", pred.x0, "start state, comma separated")->required();
  predict->add_option("--tau", pred.tau, "horizon in s (default: the model's dt)");
  predict->add_option("--goal", pred.goal, "goal label (likelihood model) or label/index in --goals");
  predict->add_option("--g", pred.g, "goal position for a regression model, comma separated");
  predict->add_option("--goals", pred.goals, "goal set JSON")->check(CLI::ExistingFile);
  add_run_flags(predict, rf, kGridFlags);

  ReachArgs reach;
  CLI::App* reachc = app.add_subcommand("reach", "reachability grid over state and time");
  reachc->add_option("--model", reach.model, "model.json or sindy.json")->required()->check(CLI::ExistingFile);
  reachc->add_option("--x0", reach.x0, "start state, comma separated")->required();
  reachc->add_option("--goals", reach.goals, "goal set JSON (needed for regression models)")
      ->check(CLI::ExistingFile);
  reachc->add_option("--cells", reach.cells, "cells per axis (default 201 / 101 / 41 for 1 / 2 / 3 dims)");
  reachc->add_option("--weights", reach.weights, "goal weights, one per goal")->delimiter(',');
  add_run_flags(reachc, rf, kReachFlags);

  PlaybackArgs play;
  CLI::App* playback = app.add_subcommand("playback", "replay one trajectory with one strategy");
  playback->add_option("--traj", play.traj, "trajectory CSV")->required()->check(CLI::ExistingFile);
  playback->add_option("--goals", play.goals, "goal set JSON")->check(CLI::ExistingFile);
  playback->add_option("--strategy", play.strategy, "nll|sindy - nn|det|disc (default sindy-det)");
  playback->add_option("--mode", play.mode, "offline or online (default online)");
  playback->add_flag("--intervals", play.intervals, "record 95% predictive interval widths");
  add_run_flags(playback, rf, kGoalFlags | kSindyFlags | kNllFlags | kGridFlags | kOnlineFlags);

  EvalArgs ev;
  CLI::App* eval = app.add_subcommand("eval", "strategy x mode matrix over a directory of trajectories");
  eval->add_option("--dir", ev.dir, "directory of trajectory CSVs (subdirectories are scenarios)")->required();
  eval->add_option("--goals", ev.goals, "goal set JSON for every trajectory")->check(CLI::ExistingFile);
  eval->add_option("--strategies", ev.strategies, "comma separated, or all (default all)")->delimiter(',');
  eval->add_option("--modes", ev.modes, "offline,online (default both)")->delimiter(',');
  eval->add_option("--csv", ev.csv, "write the aggregate table as CSV here");
  eval->add_option("--table", ev.table, "write the human-readable table here");
  eval->add_option("--threads", ev.threads, "worker threads (0 = hardware)");
  add_run_flags(eval, rf, kGoalFlags | kSindyFlags | kNllFlags | kGridFlags | kOnlineFlags);

  PlotArgs plot;
  CLI::App* plotdata = app.add_subcommand("plotdata", "plot-ready CSV: pdf-curve, jump-markers, goal-trace, reach-slice");
  plotdata->add_option("kind", plot.kind, "pdf-curve | jump-markers | goal-trace | reach-slice")->required();
  plotdata->add_option("--model", plot.models, "model file (repeatable)")->check(CLI::ExistingFile);
  plotdata->add_option("--params", plot.params, "mu_g,sigma_g,lambda,mu_beta,sigma_beta (repeatable)");
  plotdata->add_option("--x0", plot.x0, "start state");
  plotdata->add_option("--tau", plot.tau, "horizon in s (pdf-curve)");
  plotdata->add_option("--points", plot.points, "pdf-curve points (default 2001)");
  plotdata->add_option("--goal", plot.goal, "goal label for pdf-curve");
  plotdata->add_option("--goals", plot.goals, "goal set JSON")->check(CLI::ExistingFile);
  plotdata->add_option("--traj", plot.traj, "trajectory CSV (jump-markers, goal-trace)")->check(CLI::ExistingFile);
  plotdata->add_option("--km", plot.km, "raw km.csv (jump-markers; use km --window 1)")->check(CLI::ExistingFile);
  plotdata->add_option("--mode", plot.mode, "goal mode for goal-trace (default det)");
  plotdata->add_option("--t", plot.t, "slice time in s (reach-slice)");
  plotdata->add_option("--plane", plot.plane, "two dimension indices (reach-slice, default 0,1)")->delimiter(',');
  plotdata->add_option("--cells", plot.cells, "cells per axis (reach-slice)");
  add_run_flags(plotdata, rf, kGoalFlags | kReachFlags);

  if (argc < 2) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.require_subcommand(1);
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim, globals);
    if (kmc->parsed()) return run_km(km, globals);
    const RunConfig cfg = build_config(rf, globals);
    if (fit_nll->parsed()) return run_fit_nll(nll, cfg, globals);
    if (fit_sindy->parsed()) return run_fit_sindy(sindy, cfg, globals);
    if (infer_goals->parsed()) {
      emit(globals, goal_trace_text(infer, cfg, "infer-goals"));
      return 0;
    }
    if (predict->parsed()) return run_predict(pred, cfg, globals);
    if (reachc->parsed()) return run_reach(reach, cfg, globals);
    if (playback->parsed()) return run_playback(play, cfg, globals);
    if (eval->parsed()) return run_eval(ev, cfg, globals);
    if (plotdata->parsed()) return run_plotdata(plot, cfg, globals);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
