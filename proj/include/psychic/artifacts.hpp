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

// On-disk artifacts written and read by the command-line tool: model files,
// KM and goal-trace tables, reachability grids and plot data. Every CSV
// starts with a `# config_hash=... seed=...` line.

#ifndef PSYCHIC_ARTIFACTS_HPP_
#define PSYCHIC_ARTIFACTS_HPP_

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "psychic/eval_harness.hpp"
#include "psychic/km_estimator.hpp"
#include "psychic/reachability.hpp"

namespace psychic {

// "x", "y", "z" for the first three dimensions, then "x3", "x4", ...
std::string axis_name(Index dim);

// ---- model files ----------------------------------------------------------

// {"kind": "nll", "dt", "goals": [{"label", "dims": [{params, fit}]}]}.
// Without goals there is a single entry labelled "pooled".
nlohmann::json nll_model_json(const NllModel& model, const GoalSet& goals, double dt, int starts);

// {"kind": "sindy", "dt", "library", "dims": [KmModels...]}
nlohmann::json sindy_model_json(const std::vector<KmModels>& models, const std::string& library, double dt);

struct ModelFile {
  ModelKind kind = ModelKind::nll;
  double dt = 0.0;
  Index dims = 0;
  std::vector<std::string> labels;  // nll: one per parameter set
  ReachParams nll;                  // [goal][dim]
  std::vector<KmModels> sindy;      // per dim
};

ModelFile model_from_json(const nlohmann::json& j);
ModelFile load_model_file(const std::string& path);

// Per-goal parameters at x_s. Likelihood models ignore the goal positions;
// regression models evaluate their moments at (x_s, g_k), or at g = x_s when
// no goals are given.
ReachParams model_params(const ModelFile& model, const Eigen::VectorXd& x_s, const GoalSet& goals);

// ---- tables -----------------------------------------------------------------

// t,M1,M2,M4,M6,sigma_beta_sq,lambda,sigma_g_sq; t is the start of each increment.
void write_km_csv(std::ostream& out, const KMSeries& kms, double t0, const std::string& metadata);

// Inverse of write_km_csv for the moment columns; derived columns are kept.
KMSeries read_km_csv(std::istream& in);

// t,g_x[,g_y,g_z],S_settled,S_move,S_jump,switch, one row per sample. Scores
// of sample i are those of the increment starting there (the last sample
// repeats the final increment). S_settled and S_move average the dimensions;
// S_jump is 1 when any dimension is flagged.
void write_goal_trace_csv(std::ostream& out, const Trajectory& traj, const GoalTrace& trace,
                          const std::string& metadata);

struct GoalTraceTable {
  Eigen::VectorXd t;
  Eigen::MatrixXd g;  // samples x dims
  Eigen::VectorXd settled;
  Eigen::VectorXd move;
  Eigen::VectorXi jump;
  Eigen::VectorXi switched;
};
GoalTraceTable read_goal_trace_csv(std::istream& in);
GoalTraceTable read_goal_trace_file(const std::string& path);

// Goal index per sample from a `label` column holding either goal labels or
// integer indices. Rows may number n (per sample) or n - 1 (per transition).
std::vector<int> read_labels_csv(std::istream& in, const GoalSet& goals);

// Long format t,x[,y,z],logp; the collapsed field follows with t=collapsed.
void write_reach_csv(std::ostream& out, const ReachabilityGrid& grid, const std::string& metadata);

// ---- plot data ----------------------------------------------------------------

struct PdfCurve {
  std::string name;
  JumpDiffusionParams params;
};

// model,x,pdf,logp over x_s + mean +- 1.5 MAP envelopes of the widest curve.
void write_pdf_curve_csv(std::ostream& out, const std::vector<PdfCurve>& curves, double x_s, double tau,
                         Index points, const std::string& metadata);

// t,dim,step for every increment ECOD flags as a jump. `raw` holds unsmoothed
// (window 1) moments per dimension.
void write_jump_markers_csv(std::ostream& out, const std::vector<KMSeries>& raw, double t0, Index window,
                            double contamination, const std::string& metadata);

// <axis_a>,<axis_b>,logp over one slice plane.
void write_reach_slice_csv(std::ostream& out, const SliceExport& slice, const std::string& metadata);

}  // namespace psychic

#endif  // PSYCHIC_ARTIFACTS_HPP_
