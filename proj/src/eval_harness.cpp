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

#include "psychic/eval_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

#include "psychic/error.hpp"
#include "psychic/km_estimator.hpp"
#include "psychic/parallel.hpp"
#include "psychic/serialization.hpp"
#include "psychic/stats.hpp"

namespace psychic {

std::string StrategyId::name() const {
  return std::string(model == ModelKind::nll ? "nll" : "sindy") + "-" + to_string(goal);
}

std::vector<StrategyId> all_strategies() {
  std::vector<StrategyId> out;
  for (ModelKind m : {ModelKind::nll, ModelKind::sindy}) {
    for (GoalMode g : {GoalMode::nn, GoalMode::det, GoalMode::disc}) out.push_back({m, g});
  }
  return out;
}

StrategyId parse_strategy(const std::string& s) {
  for (const StrategyId& id : all_strategies()) {
    if (id.name() == s) return id;
  }
  throw Error("unknown strategy '" + s + "' (expected {nll,sindy}-{nn,det,disc})");
}

std::string to_string(RunMode mode) { return mode == RunMode::offline ? "offline" : "online"; }

RunMode parse_run_mode(const std::string& s) {
  if (s == "offline") return RunMode::offline;
  if (s == "online") return RunMode::online;
  throw Error("unknown run mode '" + s + "' (expected offline or online)");
}

double rss(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& actual) {
  if (predicted.rows() != actual.rows() || predicted.cols() != actual.cols()) throw Error("rss: shape mismatch");
  return (predicted - actual).squaredNorm();
}

NllModel fit_nll_model(const Trajectory& traj, const GoalTrace& trace, const GoalSet& goals,
                       const NllFitOptions& options, const NllModel* warm) {
  const Index goal_count = std::max<Index>(goals.size(), 1);
  const Index dims = traj.dims();
  const Index steps = traj.size() - 1;
  if (!goals.empty() && static_cast<Index>(trace.labels.size()) < steps) {
    throw Error("fit_nll_model: need a label per transition");
  }
  NllModel model;
  model.params.assign(static_cast<std::size_t>(goal_count), std::vector<JumpDiffusionParams>(static_cast<std::size_t>(dims)));
  model.fits.assign(static_cast<std::size_t>(goal_count), std::vector<NllFitResult>(static_cast<std::size_t>(dims)));

  std::vector<Index> counts(static_cast<std::size_t>(goal_count), 0);
  for (Index i = 0; i < steps; ++i) {
    const int label = goals.empty() ? 0 : trace.labels[static_cast<std::size_t>(i)];
    if (label < 0) continue;
    if (label >= goal_count) throw Error("fit_nll_model: label out of range");
    ++counts[static_cast<std::size_t>(label)];
  }
  for (Index d = 0; d < dims; ++d) {
    const Eigen::VectorXd x = traj.coordinate(d);
    std::vector<std::vector<double>> per(static_cast<std::size_t>(goal_count));
    for (Index i = 0; i < steps; ++i) {
      const int label = goals.empty() ? 0 : trace.labels[static_cast<std::size_t>(i)];
      if (label < 0) continue;
      per[static_cast<std::size_t>(label)].push_back(x(i + 1) - x(i));
    }
    std::optional<NllFitResult> pooled;
    for (Index k = 0; k < goal_count; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      NllFitOptions opts = options;
      if (warm && ks < warm->fits.size()) opts.warm_start = warm->fits[ks][static_cast<std::size_t>(d)].full_params;
      if (counts[ks] < options.min_transitions) {
        if (!pooled) {
          const Eigen::ArrayXd all = (x.tail(steps) - x.head(steps)).array();
          pooled = nll_fit_displacements(all, traj.dt(), opts);
        }
        model.fits[ks][static_cast<std::size_t>(d)] = *pooled;
        ++model.fallbacks;
      } else {
        const Eigen::Map<const Eigen::ArrayXd> disp(per[ks].data(), static_cast<Index>(per[ks].size()));
        model.fits[ks][static_cast<std::size_t>(d)] = nll_fit_displacements(disp, traj.dt(), opts);
      }
      model.params[ks][static_cast<std::size_t>(d)] = model.fits[ks][static_cast<std::size_t>(d)].params;
    }
  }
  return model;
}

std::vector<KmModels> fit_sindy_model(const Trajectory& traj, const GoalTrace& trace, const HarnessConfig& config) {
  const Index steps = traj.size() - 1;
  const FunctionLibrary library(config.library);
  std::vector<KmModels> out;
  for (Index d = 0; d < traj.dims(); ++d) {
    const KMSeries kms = raw_moments(increments(traj, d));
    out.push_back(fit_km_models(kms, traj.coordinate(d).head(steps), trace.g.col(d).head(steps), library,
                                config.sindy));
  }
  return out;
}

namespace {

struct Predictor {
  const HarnessConfig& config;
  double dt;

  // Predicts sample i + 1 from sample i; adds the interval width when asked.
  Eigen::VectorXd nll(const NllModel& model, const GoalTrace& trace, const Trajectory& traj, Index i,
                      StrategyRun& run) const {
    const std::size_t label = trace.labels.empty() || trace.labels[static_cast<std::size_t>(i)] < 0
                                  ? 0
                                  : static_cast<std::size_t>(trace.labels[static_cast<std::size_t>(i)]);
    const auto& params = model.params[std::min(label, model.params.size() - 1)];
    Eigen::VectorXd out(traj.dims());
    double width = 0.0;
    for (Index d = 0; d < traj.dims(); ++d) {
      const double xs = traj.positions()(i, d);
      const JumpDiffusionParams& p = params[static_cast<std::size_t>(d)];
      const StateGrid grid = default_grid(p, xs, dt, config.grid_cells);
      out(d) = map_predict(p, xs, dt, grid).x_t;
      if (config.record_intervals) width += predictive_interval(p, xs, dt, grid).width();
    }
    if (config.record_intervals) run.interval_widths.push_back(width / static_cast<double>(traj.dims()));
    return out;
  }

  Eigen::VectorXd sindy(const std::vector<KmModels>& models, const GoalTrace& trace, const Trajectory& traj, Index i,
                        StrategyRun& run) const {
    Eigen::VectorXd out(traj.dims());
    double width = 0.0;
    for (Index d = 0; d < traj.dims(); ++d) {
      const double xs = traj.positions()(i, d);
      const KmPrediction kp = predict_km(models[static_cast<std::size_t>(d)], xs, trace.g(i, d));
      const StateGrid grid = default_grid(kp.params, xs, dt, config.grid_cells);
      out(d) = map_predict(kp.params, xs, dt, grid).x_t;
      if (kp.variance_floor) ++run.variance_floors;
      if (config.record_intervals) width += predictive_interval(kp.params, xs, dt, grid).width();
    }
    if (config.record_intervals) run.interval_widths.push_back(width / static_cast<double>(traj.dims()));
    return out;
  }
};

}  // namespace

StrategyRun run_offline(const Trajectory& traj, const GoalSet& goals, const StrategyId& strategy,
                        const HarnessConfig& config) {
  StrategyRun run;
  run.strategy = strategy;
  run.mode = RunMode::offline;
  run.first_target = 1;
  const Index steps = traj.size() - 1;
  const GoalTrace trace = infer_goal_trace(traj, goals, strategy.goal, config.goal);
  run.switches = static_cast<Index>(trace.switches.size());
  run.jumps = trace.jumps_detected();
  run.predictions.resize(steps, traj.dims());
  const Predictor predictor{config, traj.dt()};
  if (strategy.model == ModelKind::nll) {
    const NllModel model = fit_nll_model(traj, trace, goals, config.nll);
    run.fallbacks = model.fallbacks;
    for (Index i = 0; i < steps; ++i) run.predictions.row(i) = predictor.nll(model, trace, traj, i, run).transpose();
  } else {
    const std::vector<KmModels> models = fit_sindy_model(traj, trace, config);
    for (Index i = 0; i < steps; ++i) run.predictions.row(i) = predictor.sindy(models, trace, traj, i, run).transpose();
  }
  run.rss = rss(run.predictions, traj.positions().bottomRows(steps));
  return run;
}

StrategyRun run_online(const Trajectory& traj, const GoalSet& goals, const StrategyId& strategy,
                       const HarnessConfig& config) {
  if (config.warmup < 21) throw Error("run_online: warmup must be >= 21 samples");
  if (traj.size() <= config.warmup) {
    throw Error("run_online: trajectory has " + std::to_string(traj.size()) + " samples, warmup needs more than " +
                std::to_string(config.warmup));
  }
  StrategyRun run;
  run.strategy = strategy;
  run.mode = RunMode::online;
  run.first_target = config.warmup;
  const Index n = traj.size();
  run.predictions.resize(n - config.warmup, traj.dims());
  const Predictor predictor{config, traj.dt()};
  std::optional<NllModel> previous;
  for (Index i = config.warmup - 1; i + 1 < n; ++i) {
    const Trajectory prefix = traj.prefix(i + 1);
    const GoalTrace trace = infer_goal_trace(prefix, goals, strategy.goal, config.goal);
    Eigen::VectorXd next;
    if (strategy.model == ModelKind::nll) {
      NllModel model = fit_nll_model(prefix, trace, goals, config.nll, previous ? &*previous : nullptr);
      next = predictor.nll(model, trace, prefix, i, run);
      run.fallbacks += model.fallbacks;
      previous = std::move(model);
    } else {
      next = predictor.sindy(fit_sindy_model(prefix, trace, config), trace, prefix, i, run);
    }
    run.predictions.row(i + 1 - config.warmup) = next.transpose();
    if (i + 2 == n) {
      run.switches = static_cast<Index>(trace.switches.size());
      run.jumps = trace.jumps_detected();
    }
  }
  run.rss = rss(run.predictions, traj.positions().bottomRows(n - config.warmup));
  return run;
}

Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) throw Error("aggregate: empty input");
  Aggregate a;
  a.count = static_cast<Index>(values.size());
  Eigen::VectorXd logs(a.count);
  for (Index i = 0; i < a.count; ++i) {
    double v = values[static_cast<std::size_t>(i)];
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error("aggregate: values must be finite and nonnegative");
    if (v < 1e-12) {
      v = 1e-12;
      ++a.floored;
    }
    logs(i) = std::log(v);
  }
  const double m = logs.mean();
  a.geometric_mean = std::exp(m);
  if (a.count == 1) {
    a.ci_low = a.ci_high = a.geometric_mean;
    return a;
  }
  const double se = std::sqrt(stats::sample_variance(logs) / static_cast<double>(a.count));
  const double t = stats::student_t_quantile(0.975, static_cast<double>(a.count - 1));
  a.ci_low = std::exp(m - t * se);
  a.ci_high = std::exp(m + t * se);
  return a;
}

bool EvalReport::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const EvalCell& c) { return c.ok; });
}

EvalReport run_matrix(const std::vector<EvalInput>& inputs, const std::vector<StrategyId>& strategies,
                      const std::vector<RunMode>& modes, const HarnessConfig& config, int threads) {
  EvalReport report;
  const std::size_t per_input = strategies.size() * modes.size();
  report.cells.resize(inputs.size() * per_input);
  parallel_for(
      report.cells.size(),
      [&](std::size_t c) {
        const EvalInput& in = inputs[c / per_input];
        const StrategyId& strategy = strategies[(c % per_input) / modes.size()];
        const RunMode mode = modes[c % modes.size()];
        EvalCell& cell = report.cells[c];
        cell.trajectory = in.id;
        cell.scenario = in.scenario;
        cell.strategy = strategy;
        cell.mode = mode;
        try {
          const StrategyRun run = mode == RunMode::offline ? run_offline(in.trajectory, in.goals, strategy, config)
                                                           : run_online(in.trajectory, in.goals, strategy, config);
          cell.ok = true;
          cell.rss = run.rss;
          cell.steps = run.steps();
          cell.switches = run.switches;
          cell.jumps = run.jumps;
          cell.variance_floors = run.variance_floors;
          cell.fallbacks = run.fallbacks;
        } catch (const std::exception& e) {
          cell.ok = false;
          cell.error = "trajectory " + in.id + ": " + e.what();
        }
      },
      threads < 0 ? 1u : static_cast<unsigned>(threads));
  report.rows = table_rows(report.cells);
  return report;
}

std::vector<EvalRow> table_rows(const std::vector<EvalCell>& cells) {
  std::vector<std::string> scenarios;
  for (const EvalCell& c : cells) {
    if (std::find(scenarios.begin(), scenarios.end(), c.scenario) == scenarios.end()) scenarios.push_back(c.scenario);
  }
  const std::vector<StrategyId> order = all_strategies();
  auto strategy_rank = [&](const StrategyId& s) {
    return static_cast<std::size_t>(std::find(order.begin(), order.end(), s) - order.begin());
  };
  auto scenario_rank = [&](const std::string& s) {
    return static_cast<std::size_t>(std::find(scenarios.begin(), scenarios.end(), s) - scenarios.begin());
  };
  using Key = std::tuple<int, std::size_t, std::size_t>;
  std::map<Key, std::vector<const EvalCell*>> groups;
  for (const EvalCell& c : cells) {
    groups[{static_cast<int>(c.mode), scenario_rank(c.scenario), strategy_rank(c.strategy)}].push_back(&c);
  }
  std::vector<EvalRow> rows;
  for (const auto& [key, members] : groups) {
    EvalRow row;
    row.mode = members.front()->mode;
    row.scenario = members.front()->scenario;
    row.strategy = members.front()->strategy;
    std::vector<double> values;
    double switches = 0.0;
    double jumps = 0.0;
    for (const EvalCell* c : members) {
      if (!c->ok) {
        ++row.failures;
        continue;
      }
      values.push_back(c->rss);
      switches += static_cast<double>(c->switches);
      jumps += static_cast<double>(c->jumps);
    }
    if (!values.empty()) {
      row.rss = aggregate(values);
      row.mean_switches = switches / static_cast<double>(values.size());
      row.mean_jumps = jumps / static_cast<double>(values.size());
    }
    rows.push_back(row);
  }
  return rows;
}

std::string table_report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "scenario,mode,strategy,n,geo_mean_rss,ci_low,ci_high,floored,mean_switches,mean_jumps,failures\n";
  for (const EvalRow& r : report.rows) {
    out << r.scenario << ',' << to_string(r.mode) << ',' << r.strategy.name() << ',' << r.rss.count << ','
        << format_double(r.rss.geometric_mean) << ',' << format_double(r.rss.ci_low) << ','
        << format_double(r.rss.ci_high) << ',' << r.rss.floored << ',' << format_double(r.mean_switches) << ','
        << format_double(r.mean_jumps) << ',' << r.failures << '\n';
  }
  return out.str();
}

std::string table_report_text(const EvalReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %-8s %-10s %4s %12s %25s %9s %9s %5s\n", "scenario", "mode", "strategy", "n",
                "RSS (gmean)", "95% CI", "switches", "jumps", "fail");
  out << line;
  for (const EvalRow& r : report.rows) {
    char ci[64];
    std::snprintf(ci, sizeof ci, "[%.4g, %.4g]", r.rss.ci_low, r.rss.ci_high);
    std::snprintf(line, sizeof line, "%-12s %-8s %-10s %4lld %12.5g %25s %9.2f %9.2f %5lld\n", r.scenario.c_str(),
                  to_string(r.mode).c_str(), r.strategy.name().c_str(), static_cast<long long>(r.rss.count),
                  r.rss.geometric_mean, ci, r.mean_switches, r.mean_jumps, static_cast<long long>(r.failures));
    out << line;
  }
  return out.str();
}

nlohmann::json report_json(const EvalReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const EvalCell& c : report.cells) {
    nlohmann::json j = {{"trajectory", c.trajectory}, {"scenario", c.scenario}, {"strategy", c.strategy.name()},
                        {"mode", to_string(c.mode)},  {"ok", c.ok}};
    if (c.ok) {
      j["rss"] = c.rss;
      j["steps"] = c.steps;
      j["switches"] = c.switches;
      j["jumps"] = c.jumps;
      j["variance_floors"] = c.variance_floors;
      j["fallbacks"] = c.fallbacks;
    } else {
      j["error"] = c.error;
    }
    cells.push_back(j);
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const EvalRow& r : report.rows) {
    rows.push_back({{"scenario", r.scenario},
                    {"mode", to_string(r.mode)},
                    {"strategy", r.strategy.name()},
                    {"n", r.rss.count},
                    {"geo_mean_rss", r.rss.geometric_mean},
                    {"ci_low", r.rss.ci_low},
                    {"ci_high", r.rss.ci_high},
                    {"floored", r.rss.floored},
                    {"mean_switches", r.mean_switches},
                    {"mean_jumps", r.mean_jumps},
                    {"failures", r.failures}});
  }
  return {{"cells", cells}, {"rows", rows}};
}

nlohmann::json run_json(const StrategyRun& run, const Trajectory& traj) {
  nlohmann::json preds = nlohmann::json::array();
  for (Index j = 0; j < run.predictions.rows(); ++j) {
    nlohmann::json row = {traj.times()(run.first_target + j)};
    for (Index d = 0; d < run.predictions.cols(); ++d) row.push_back(run.predictions(j, d));
    preds.push_back(row);
  }
  nlohmann::json j = {{"strategy", run.strategy.name()},
                      {"mode", to_string(run.mode)},
                      {"rss", run.rss},
                      {"steps", run.steps()},
                      {"first_target", run.first_target},
                      {"switches", run.switches},
                      {"jumps", run.jumps},
                      {"variance_floors", run.variance_floors},
                      {"fallbacks", run.fallbacks},
                      {"predictions", preds}};
  if (!run.interval_widths.empty()) j["interval_widths"] = run.interval_widths;
  return j;
}

}  // namespace psychic
