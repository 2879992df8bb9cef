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

// Likelihood fitting, goal posteriors and MAP prediction on top of the
// Poisson-normal transition density.

#ifndef PSYCHIC_MIXTURE_PDF_HPP_
#define PSYCHIC_MIXTURE_PDF_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psychic/trajectory.hpp"
#include "psychic/transition_density.hpp"

namespace psychic {

inline constexpr double kScaleFloor = 1e-6;
// Largest lambda * tau any fitted or predicted model may use.
inline constexpr double kMaxRateTau = 10.0;

// Sum of log p(d_i) over a batch of displacements.
double sum_log_density(const JumpDiffusionParams& p, const Eigen::Ref<const Eigen::ArrayXd>& displacements,
                       double tau);

enum class ModelSelection {
  // Keep the best jump-diffusion optimum as is.
  none,
  // Compare against the closed-form lambda = 0 fit and keep the jump model
  // only when its likelihood gain beats the BIC penalty for the three extra
  // parameters.
  bic,
};

struct NllFitOptions {
  int starts = 8;
  std::uint64_t seed = 0;
  int max_evaluations = 3000;  // per start
  double f_tol = 1e-10;  // relative
  double x_tol = 1e-5;
  // Stop a start once 50 iterations gain less than 1e-3 nats.
  int stall_iterations = 50;
  double stall_tol = 1e-3;
  // Upper bound on lambda * tau; the objective is +inf beyond it.
  double max_rate_tau = kMaxRateTau;
  ModelSelection selection = ModelSelection::bic;
  // Replaces the scattered starts with a single start here.
  std::optional<JumpDiffusionParams> warm_start;
  Index min_transitions = 10;
};

struct NllFitResult {
  JumpDiffusionParams params;
  // Negative log-likelihood of `params`.
  double objective = 0.0;
  // Best jump-diffusion optimum, whether or not it was selected.
  JumpDiffusionParams full_params;
  double full_objective = 0.0;
  // Objective at each start point before optimization.
  std::vector<double> start_objectives;
  bool jump_model = true;
  bool floor_hit = false;
  int evaluations = 0;
  int iterations = 0;
  Index transitions = 0;
};

// Fit one parameter set to a batch of displacements observed over tau.
NllFitResult nll_fit_displacements(const Eigen::Ref<const Eigen::ArrayXd>& displacements, double tau,
                                   const NllFitOptions& options = {});

// Per-goal fit on one dimension. `labels` holds a goal index per transition
// (size n-1) or per sample (size n; transition i takes label i). Negative
// labels are skipped. Every goal in [0, goal_count) needs
// options.min_transitions transitions.
std::vector<NllFitResult> nll_fit(const Trajectory& traj, Index dim, std::span<const int> labels,
                                  int goal_count, const NllFitOptions& options = {});

struct EmOptions {
  int max_iterations = 100;
  double tolerance = 1e-8;
};

struct GoalPosterior {
  // Per-trajectory posterior under the supplied prior.
  Eigen::VectorXd probabilities;
  // Transition x goal responsibilities under the final EM prior.
  Eigen::MatrixXd responsibilities;
  // EM estimate of the mixing prior.
  Eigen::VectorXd prior;
  std::vector<double> log_likelihood_history;
  int iterations = 0;
  Index classification = 0;
};

// params[g][d] describes goal g along dimension d. from/to hold one
// transition per row.
GoalPosterior goal_posterior(const std::vector<std::vector<JumpDiffusionParams>>& params,
                             const Eigen::MatrixXd& from, const Eigen::MatrixXd& to, double tau,
                             const Eigen::VectorXd& prior, const EmOptions& options = {});

struct StateGrid {
  double lo = 0.0;
  double hi = 0.0;
  Index cells = 0;

  double spacing() const { return cells > 1 ? (hi - lo) / static_cast<double>(cells - 1) : 0.0; }
  double point(Index i) const { return cells > 1 ? lo + spacing() * static_cast<double>(i) : lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

inline constexpr Index kDefaultGridCells = 201;

// max(6 sigma_g sqrt(tau), 6 sigma_beta max(1, lambda tau)) + |mu_g| tau + lambda tau |mu_beta|
double map_envelope(const JumpDiffusionParams& p, double tau);

StateGrid default_grid(const JumpDiffusionParams& p, double x_s, double tau,
                       Index cells = kDefaultGridCells);

struct MapPrediction {
  double x_t = 0.0;
  double log_density = 0.0;
  StateGrid grid;
  bool expanded = false;
};

// Grid argmax of the transition density; ties go to the point nearest x_s.
MapPrediction map_predict(const JumpDiffusionParams& p, double x_s, double tau, const StateGrid& grid);

struct PredictiveInterval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

// Central interval holding `mass` of the grid-normalized density.
PredictiveInterval predictive_interval(const JumpDiffusionParams& p, double x_s, double tau,
                                       const StateGrid& grid, double mass = 0.95);

}  // namespace psychic

#endif  // PSYCHIC_MIXTURE_PDF_HPP_
