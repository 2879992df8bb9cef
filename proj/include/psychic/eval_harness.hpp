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

// Offline and online 1-step prediction over the six model x goal-mode
// strategies, with geometric-mean aggregation and report emission.

#ifndef PSYCHIC_EVAL_HARNESS_HPP_
#define PSYCHIC_EVAL_HARNESS_HPP_

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "psychic/goal_engine.hpp"
#include "psychic/mixture_pdf.hpp"
#include "psychic/sindy.hpp"
#include "psychic/trajectory.hpp"

namespace psychic {

enum class ModelKind { nll, sindy };
enum class RunMode { offline, online };

struct StrategyId {
  ModelKind model = ModelKind::nll;
  GoalMode goal = GoalMode::nn;

  // "nll-nn", "sindy-det", ...
  std::string name() const;
  friend bool operator==(const StrategyId&, const StrategyId&) = default;
};

// The six combinations in a fixed order.
std::vector<StrategyId> all_strategies();
StrategyId parse_strategy(const std::string& s);
std::string to_string(RunMode mode);
RunMode parse_run_mode(const std::string& s);

struct HarnessConfig {
  GoalEngineConfig goal;
  NllFitOptions nll;
  LibrarySpec library;
  SindyOptions sindy{SsrOptions{0.1, true}, false};
  Index grid_cells = kDefaultGridCells;
  Index warmup = 40;
  // Record the central 95% predictive interval width at every step.
  bool record_intervals = false;
};

// Per-goal, per-dimension parameters for the likelihood model. Goals with
// too few transitions use the pooled fit.
struct NllModel {
  std::vector<std::vector<JumpDiffusionParams>> params;  // [goal][dim]; one entry when no goals
  std::vector<std::vector<NllFitResult>> fits;
  Index fallbacks = 0;
};

struct StrategyRun {
  StrategyId strategy;
  RunMode mode = RunMode::offline;
  // predictions.row(j) estimates sample first_target + j.
  Index first_target = 1;
  Eigen::MatrixXd predictions;
  double rss = 0.0;
  Index switches = 0;
  Index jumps = 0;
  std::vector<double> interval_widths;
  Index variance_floors = 0;
  Index fallbacks = 0;
  Index steps() const { return predictions.rows(); }
};

// Sum over rows of the squared Euclidean error.
double rss(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& actual);

NllModel fit_nll_model(const Trajectory& traj, const GoalTrace& trace, const GoalSet& goals,
                       const NllFitOptions& options, const NllModel* warm = nullptr);
std::vector<KmModels> fit_sindy_model(const Trajectory& traj, const GoalTrace& trace, const HarnessConfig& config);

StrategyRun run_offline(const Trajectory& traj, const GoalSet& goals, const StrategyId& strategy,
                        const HarnessConfig& config = {});
StrategyRun run_online(const Trajectory& traj, const GoalSet& goals, const StrategyId& strategy,
                       const HarnessConfig& config = {});

struct Aggregate {
  double geometric_mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  Index count = 0;
  Index floored = 0;  // zeros raised to 1e-12
};

// exp(mean(log v)) with a Student t 95% interval on mean(log v).
Aggregate aggregate(std::span<const double> values);

struct EvalInput {
  std::string id;
  std::string scenario;
  Trajectory trajectory;
  GoalSet goals;
};

struct EvalCell {
  std::string trajectory;
  std::string scenario;
  StrategyId strategy;
  RunMode mode = RunMode::offline;
  bool ok = false;
  std::string error;
  double rss = 0.0;
  Index steps = 0;
  Index switches = 0;
  Index jumps = 0;
  Index variance_floors = 0;
  Index fallbacks = 0;
};

struct EvalRow {
  std::string scenario;
  StrategyId strategy;
  RunMode mode = RunMode::offline;
  Aggregate rss;
  double mean_switches = 0.0;
  double mean_jumps = 0.0;
  Index failures = 0;
};

struct EvalReport {
  std::vector<EvalCell> cells;
  std::vector<EvalRow> rows;
  bool all_ok() const;
};

EvalReport run_matrix(const std::vector<EvalInput>& inputs, const std::vector<StrategyId>& strategies,
                      const std::vector<RunMode>& modes, const HarnessConfig& config = {}, int threads = 0);

// Rebuilds the aggregate rows from cells (stable ordering).
std::vector<EvalRow> table_rows(const std::vector<EvalCell>& cells);

std::string table_report_csv(const EvalReport& report);
std::string table_report_text(const EvalReport& report);
nlohmann::json report_json(const EvalReport& report);
nlohmann::json run_json(const StrategyRun& run, const Trajectory& traj);

}  // namespace psychic

#endif  // PSYCHIC_EVAL_HARNESS_HPP_
