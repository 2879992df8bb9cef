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

// Synthetic jump-drift-diffusion trajectories with ground-truth labels.
//
// Each dimension follows
//   dX = mu dt + sigma_g dW + sum_{j <= kappa} (mu_beta + sigma_beta Z_j),
//   kappa ~ Poisson(lambda dt),
// integrated with Euler-Maruyama. The drift is either a constant velocity or a
// mean reversion theta (g - X) toward the goal active at the step's start.
// Dimension d draws from Philox stream d, so (config, seed) fixes the output.

#ifndef PSYCHIC_SDE_SIMULATOR_HPP_
#define PSYCHIC_SDE_SIMULATOR_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "psychic/trajectory.hpp"

namespace psychic {

enum class DriftKind { constant, mean_reverting };

struct DriftSpec {
  DriftKind kind = DriftKind::constant;
  double value = 0.0;  // mu in m/s, or theta in 1/s
};

struct GoalSwitch {
  double time = 0.0;
  Index goal = 0;
};

struct SimConfig {
  std::vector<DriftSpec> drift;  // one per dimension
  double sigma_g = 0.0;          // m / sqrt(s)
  double lambda = 0.0;           // jumps / s
  double mu_beta = 0.0;          // m
  double sigma_beta = 0.0;       // m
  double dt = 0.05;
  Index steps = 1;
  std::uint64_t seed = 0;
  std::vector<GoalSwitch> schedule;
  Eigen::VectorXd x0;

  Index dims() const { return x0.size(); }
  // Throws on any violated invariant; goals are needed to check the schedule.
  void validate(const GoalSet& goals) const;
};

struct JumpEvent {
  Index step = 0;
  Index dim = 0;
  double size = 0.0;
};

struct SimResult {
  Trajectory trajectory;
  std::vector<JumpEvent> jumps;
  std::vector<Index> active_goal;  // per sample; -1 when no goal is scheduled
};

SimResult simulate(const SimConfig& config, const GoalSet& goals);

struct BatchResult {
  std::vector<SimResult> results;
  std::vector<std::string> warnings;
};

// One config per seed, or a single config shared by every seed. The seed in
// each config is replaced by the matching entry of seeds.
BatchResult simulate_batch(const std::vector<SimConfig>& configs, const GoalSet& goals,
                           const std::vector<std::uint64_t>& seeds, unsigned threads = 0);

SimConfig sim_config_from_json(const nlohmann::json& j, GoalSet* goals_out = nullptr);
nlohmann::json sim_config_to_json(const SimConfig& config, const GoalSet& goals);
nlohmann::json truth_to_json(const SimResult& result, std::uint64_t seed);

}  // namespace psychic

#endif  // PSYCHIC_SDE_SIMULATOR_HPP_
