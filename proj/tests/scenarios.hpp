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

// Simulated scenarios shared by the unit and acceptance suites.

#ifndef PSYCHIC_TESTS_SCENARIOS_HPP_
#define PSYCHIC_TESTS_SCENARIOS_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "psychic/sde_simulator.hpp"
#include "psychic/trajectory.hpp"

namespace psychic::testing {

inline GoalSet goals_1d(const std::vector<double>& positions) {
  std::vector<Goal> gs;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    gs.push_back({std::string(1, static_cast<char>('a' + k)), Eigen::VectorXd::Constant(1, positions[k])});
  }
  return GoalSet(std::move(gs));
}

// Constant drift mu in one dimension, no goals.
inline SimConfig drift_config(double mu, double sigma_g, Index steps, std::uint64_t seed, double dt = 0.05) {
  SimConfig c;
  c.drift = {{DriftKind::constant, mu}};
  c.sigma_g = sigma_g;
  c.dt = dt;
  c.steps = steps;
  c.seed = seed;
  c.x0 = Eigen::VectorXd::Zero(1);
  return c;
}

// Goals at -0.5 and +0.5, mean reversion toward the active one, the active
// goal alternating every `period` seconds starting with +0.5 from x0 = -0.5.
struct TwoGoalScenario {
  double theta = 1.5;
  double sigma_g = 0.1;
  double lambda = 0.5;
  double mu_beta = 0.0;
  double sigma_beta = 0.1;
  double period = 10.0;
  double dt = 0.05;
  Index steps = 600;
};

inline GoalSet two_goals() { return goals_1d({-0.5, 0.5}); }

inline SimConfig two_goal_config(const TwoGoalScenario& s, std::uint64_t seed) {
  SimConfig c;
  c.drift = {{DriftKind::mean_reverting, s.theta}};
  c.sigma_g = s.sigma_g;
  c.lambda = s.lambda;
  c.mu_beta = s.mu_beta;
  c.sigma_beta = s.sigma_beta;
  c.dt = s.dt;
  c.steps = s.steps;
  c.seed = seed;
  c.x0 = Eigen::VectorXd::Constant(1, -0.5);
  for (int k = 0; k * s.period < static_cast<double>(s.steps) * s.dt; ++k) {
    c.schedule.push_back({k * s.period, static_cast<Index>((k + 1) % 2)});
  }
  return c;
}

inline SimResult two_goal_run(const TwoGoalScenario& s, std::uint64_t seed) {
  return simulate(two_goal_config(s, seed), two_goals());
}

}  // namespace psychic::testing

#endif  // PSYCHIC_TESTS_SCENARIOS_HPP_
