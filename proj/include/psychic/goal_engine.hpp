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

// Settled/move/jump scores, ECOD jump gating, and goal dynamics
//
//   g' = xi1 S_settled (X - g) + xi2 S_move v_dir + xi3 S_jump sigma_beta v_dir
//        + sum_k xi_{3+k} S_move w_k (g_k - g),   w = softmax(-|g - g_k| / T_w)
//
// All windows are trailing so that a score at step i only sees steps <= i.

#ifndef PSYCHIC_GOAL_ENGINE_HPP_
#define PSYCHIC_GOAL_ENGINE_HPP_

#include <Eigen/Core>

#include <string>
#include <vector>

#include "psychic/sindy.hpp"
#include "psychic/trajectory.hpp"

namespace psychic {

inline constexpr double kDispersionVarFloor = 1e-12;
inline constexpr double kMadFloor = 1e-12;

struct GoalEngineConfig {
  Index window = 21;             // odd, >= 3
  double direction_deadband = 0.05;  // m/s
  double contamination = 0.05;   // ECOD q
  double switch_threshold = 0.01;  // m, disc-mode switch
  // Goal-dynamics weights, 3 + K entries; empty means all 1.
  std::vector<double> xi;
  // Softmax temperature in m; <= 0 means the mean pairwise goal distance.
  double temperature = 0.0;

  void validate() const;
};

// R_i = mean(M1) / max(var(M1), 1e-12) over the trailing window ending at i
// (population variance; shorter windows at the start).
Eigen::VectorXd dispersion(const Eigen::VectorXd& m1, Index window);

struct SettledScores {
  Eigen::VectorXd settled;
  Eigen::VectorXd move;
};

// S_settled = 1/2 (1 + erf((median(R) - R) / (sqrt(2) max(MAD(R), eps)))),
// median and MAD over the trailing window.
SettledScores settled_score(const Eigen::VectorXd& r, Index window);

// Rows are steps, columns are features. Returns 1 where the ECOD score is
// strictly above its (1 - q) empirical quantile.
Eigen::VectorXi ecod_jump_outliers(const Eigen::MatrixXd& features, double contamination = 0.05);

// Raw ECOD scores (max of left-tail, right-tail and skew-chosen sums).
Eigen::VectorXd ecod_scores(const Eigen::MatrixXd& features);

// Per-step jump features (lambda_i, sigma_beta^2_i) from the moment
// relations applied to one increment's excess moments over the Gaussian
// part implied by the trailing-median M2:
//   E4 = M4_i - 3 dt M2^2,  E6 = M6_i - 15 dt^2 M2^3
// Steps without excess clamp to (0, 0), which ECOD treats as ties.
Eigen::MatrixXd jump_features(const KMSeries& raw, Index window);

// Rows are steps (increments), columns are dimensions.
struct GoalScores {
  Eigen::MatrixXd r;
  Eigen::MatrixXd settled;
  Eigen::MatrixXd move;
  Eigen::MatrixXi jump;
  Eigen::MatrixXi direction;
  Eigen::MatrixXd sigma_beta;  // trailing-window KM estimate

  Index steps() const { return r.rows(); }
  Index dims() const { return r.cols(); }
  // Steps flagged as a jump in any dimension.
  Index jump_count() const;
};

GoalScores compute_scores(const Trajectory& traj, const GoalEngineConfig& config = {});

// One step's scores for every dimension.
struct StepScores {
  Eigen::VectorXd settled, move, jump, direction, sigma_beta;
};
StepScores step_scores(const GoalScores& scores, Index step);

// Softmax proximity weights of g to each known goal.
Eigen::VectorXd goal_weights(const Eigen::VectorXd& g, const GoalSet& goals, double temperature);

// dims x (3 + K) matrix of the bracketed terms; g' = terms * xi.
Eigen::MatrixXd goal_dynamics_terms(const Eigen::VectorXd& g, const Eigen::VectorXd& x, const StepScores& s,
                                    const GoalSet& goals, double temperature);

struct GoalStep {
  Eigen::VectorXd g_dot;
  Eigen::VectorXd g_next;
};

GoalStep goal_dynamics_step(const Eigen::VectorXd& g, const Eigen::VectorXd& x, const StepScores& s,
                            const GoalSet& goals, const Eigen::VectorXd& xi, double dt, double temperature);

enum class GoalMode { nn, det, disc };

std::string to_string(GoalMode mode);
GoalMode parse_goal_mode(const std::string& s);

struct SwitchEvent {
  Index step = 0;  // sample index where the new goal first holds
  Eigen::VectorXd from;
  Eigen::VectorXd to;
};

struct GoalTrace {
  GoalMode mode = GoalMode::nn;
  Eigen::MatrixXd g;           // samples x dims
  std::vector<int> labels;     // nearest known goal per sample, -1 without goals
  std::vector<SwitchEvent> switches;
  Eigen::MatrixXd raw;         // integrated trace before snapping (det, disc)
  GoalScores scores;

  Index jumps_detected() const { return scores.jump_count(); }
};

GoalTrace infer_goal_trace(const Trajectory& traj, const GoalSet& goals, GoalMode mode,
                           const GoalEngineConfig& config = {});

// Fit xi from the integrated trace. Rows stack steps and dimensions; target
// is the finite difference of the raw trace.
SindyModel sindy_goal_fit(const Trajectory& traj, const GoalTrace& trace, const GoalSet& goals,
                          const GoalEngineConfig& config = {}, const SsrOptions& ssr = {});

}  // namespace psychic

#endif  // PSYCHIC_GOAL_ENGINE_HPP_
