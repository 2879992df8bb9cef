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

#include <doctest.h>

#include <cmath>

#include "psychic/rng.hpp"
#include "psychic/sde_simulator.hpp"
#include "psychic/stats.hpp"
#include "scenarios.hpp"

using namespace psychic;

TEST_SUITE("rng") {

// Known-answer vectors published with the Random123 library.
TEST_CASE("philox4x32-10 known answers") {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  CHECK(Philox::block(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox::block(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox::block(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
  Philox a(42, 3), b(42, 3), c(42, 4);
  bool differ = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    differ = differ || va != c.next_u64();
  }
  CHECK(differ);
}

TEST_CASE("sampler moments") {
  Philox rng(7);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, sp = 0, sp_big = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
    sp += static_cast<double>(rng.poisson(0.7));
    sp_big += static_cast<double>(rng.poisson(40.0));
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(sp / n == doctest::Approx(0.7).epsilon(0.01));
  CHECK(sp_big / n == doctest::Approx(40.0).epsilon(0.005));
  CHECK(rng.poisson(0.0) == 0);
}

}  // TEST_SUITE

TEST_SUITE("sde-simulator") {

TEST_CASE("deterministic limit follows the ODE") {
  SimConfig c = testing::drift_config(0.3, 0.0, 400, 5);
  c.x0 = Eigen::VectorXd::Constant(1, 1.5);
  const SimResult r = simulate(c, GoalSet{});
  REQUIRE(r.trajectory.size() == 401);
  for (Index i = 0; i <= 400; ++i) {
    CHECK(r.trajectory.positions()(i, 0) == doctest::Approx(1.5 + 0.3 * static_cast<double>(i) * 0.05).epsilon(1e-12));
  }
  CHECK(r.jumps.empty());
}

TEST_CASE("increment variance without jumps") {
  const SimResult r = simulate(testing::drift_config(0.0, 0.2, 20000, 11), GoalSet{});
  const Eigen::VectorXd inc = increments(r.trajectory, 0).values;
  CHECK(stats::sample_variance(inc) == doctest::Approx(0.04 * 0.05).epsilon(0.05));
  CHECK(r.jumps.empty());
}

TEST_CASE("jump counts match Poisson(200)") {
  // P(160 <= K <= 240) = 0.99578 for K ~ Poisson(200).
  int inside = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    SimConfig c = testing::drift_config(0.0, 0.1, 2000, 100 + s);
    c.lambda = 2.0;
    c.sigma_beta = 0.05;
    const SimResult r = simulate(c, GoalSet{});
    const auto n = r.jumps.size();
    inside += n >= 160 && n <= 240;
  }
  CHECK(inside >= 95);
}

TEST_CASE("increment mean and variance match the jump-diffusion moments") {
  SimConfig c = testing::drift_config(0.2, 0.15, 40000, 23);
  c.lambda = 1.5;
  c.mu_beta = 0.04;
  c.sigma_beta = 0.06;
  const SimResult r = simulate(c, GoalSet{});
  const Eigen::VectorXd inc = increments(r.trajectory, 0).values;
  const double n = static_cast<double>(inc.size());
  const double mean = stats::mean(inc);
  const double var = stats::population_variance(inc);
  const double m4 = (inc.array() - mean).pow(4).mean();
  const double dt = c.dt;
  const double want_mean = 0.2 * dt + c.lambda * dt * c.mu_beta;
  const double want_var =
      c.sigma_g * c.sigma_g * dt + c.lambda * dt * (c.mu_beta * c.mu_beta + c.sigma_beta * c.sigma_beta);
  CHECK(std::abs(mean - want_mean) <= 3.0 * std::sqrt(var / n));
  CHECK(std::abs(var - want_var) <= 3.0 * std::sqrt((m4 - var * var) / n));
  for (const JumpEvent& j : r.jumps) CHECK(std::abs(j.size) > 0.0);
}

TEST_CASE("same seed, same bytes") {
  SimConfig c = testing::drift_config(0.1, 0.2, 500, 99);
  c.lambda = 1.0;
  c.sigma_beta = 0.1;
  const SimResult a = simulate(c, GoalSet{});
  const SimResult b = simulate(c, GoalSet{});
  CHECK(a.trajectory.positions() == b.trajectory.positions());
  CHECK(a.jumps.size() == b.jumps.size());
  c.seed = 100;
  CHECK(simulate(c, GoalSet{}).trajectory.positions() != a.trajectory.positions());
}

TEST_CASE("batch keeps order and ignores the thread count") {
  const SimConfig c = testing::drift_config(0.0, 0.1, 100, 0);
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 50; ++s) seeds.push_back(1000 + s);
  const BatchResult one = simulate_batch({c}, GoalSet{}, seeds, 1);
  const BatchResult four = simulate_batch({c}, GoalSet{}, seeds, 4);
  REQUIRE(one.results.size() == 50);
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(one.results[i].trajectory.positions() == four.results[i].trajectory.positions());
    SimConfig single = c;
    single.seed = seeds[i];
    CHECK(simulate(single, GoalSet{}).trajectory.positions() == one.results[i].trajectory.positions());
  }
  CHECK(one.warnings.empty());
  const BatchResult dup = simulate_batch({c}, GoalSet{}, {5, 5}, 1);
  CHECK(dup.results.size() == 2);
  CHECK(dup.warnings.size() == 1);
  CHECK_THROWS(simulate_batch({c}, GoalSet{}, {}, 1));
}

TEST_CASE("schedule switching at half time changes the active goal once") {
  const GoalSet goals = testing::goals_1d({-1.0, 1.0});
  SimConfig c;
  c.drift = {{DriftKind::mean_reverting, 1.0}};
  c.sigma_g = 0.05;
  c.dt = 0.05;
  c.steps = 400;
  c.x0 = Eigen::VectorXd::Zero(1);
  c.schedule = {{0.0, 0}, {10.0, 1}};
  const SimResult r = simulate(c, goals);
  int changes = 0;
  for (std::size_t i = 1; i < r.active_goal.size(); ++i) changes += r.active_goal[i] != r.active_goal[i - 1];
  CHECK(changes == 1);
  CHECK(r.active_goal.front() == 0);
  CHECK(r.active_goal.back() == 1);
}

TEST_CASE("mean reversion settles on the goal") {
  const GoalSet goals = testing::goals_1d({0.8});
  SimConfig c;
  c.drift = {{DriftKind::mean_reverting, 2.0}};
  c.dt = 0.05;
  c.steps = 400;
  c.x0 = Eigen::VectorXd::Zero(1);
  c.schedule = {{0.0, 0}};
  const SimResult r = simulate(c, goals);
  CHECK(r.trajectory.positions()(400, 0) == doctest::Approx(0.8).epsilon(1e-6));
}

TEST_CASE("config validation and JSON") {
  SimConfig c = testing::drift_config(0.0, -1.0, 10, 0);
  CHECK_THROWS(c.validate(GoalSet{}));
  c.sigma_g = 0.1;
  c.schedule = {{1.0, 0}, {0.5, 0}};
  CHECK_THROWS(c.validate(testing::goals_1d({0.0})));
  c.schedule = {{0.0, 3}};
  CHECK_THROWS(c.validate(testing::goals_1d({0.0})));

  const GoalSet goals = testing::two_goals();
  const SimConfig two = testing::two_goal_config({}, 8);
  GoalSet back_goals;
  const SimConfig back = sim_config_from_json(sim_config_to_json(two, goals), &back_goals);
  CHECK(back_goals.size() == 2);
  CHECK(simulate(back, back_goals).trajectory.positions() == simulate(two, goals).trajectory.positions());

  nlohmann::json bad = sim_config_to_json(two, goals);
  bad["typo"] = 1;
  CHECK_THROWS(sim_config_from_json(bad));
}

}  // TEST_SUITE
