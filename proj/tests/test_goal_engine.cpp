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

#include "psychic/goal_engine.hpp"
#include "psychic/km_estimator.hpp"
#include "psychic/rng.hpp"
#include "scenarios.hpp"

using namespace psychic;

namespace {

StepScores scores_1d(double settled, double jump, double direction, double sigma_beta = 0.0) {
  StepScores s;
  s.settled = Eigen::VectorXd::Constant(1, settled);
  s.move = Eigen::VectorXd::Constant(1, 1.0 - settled);
  s.jump = Eigen::VectorXd::Constant(1, jump);
  s.direction = Eigen::VectorXd::Constant(1, direction);
  s.sigma_beta = Eigen::VectorXd::Constant(1, sigma_beta);
  return s;
}

Trajectory line(const Eigen::VectorXd& x, double dt = 0.05) {
  return Trajectory(Eigen::VectorXd::LinSpaced(x.size(), 0.0, dt * static_cast<double>(x.size() - 1)), x, dt);
}

}  // namespace

TEST_SUITE("goal-engine") {

TEST_CASE("dispersion coefficient") {
  const Eigen::VectorXd constant = Eigen::VectorXd::Constant(10, 0.5);
  CHECK(dispersion(constant, 5)(9) == doctest::Approx(0.5 / kDispersionVarFloor));

  const Eigen::VectorXd m1 = (Eigen::VectorXd(3) << 1, 2, 3).finished();
  CHECK(dispersion(m1, 3)(2) == doctest::Approx(3.0));

  Philox rng(21);
  Eigen::VectorXd white(500);
  for (Index i = 0; i < white.size(); ++i) white(i) = rng.normal();
  const Eigen::VectorXd r = dispersion(white, 21);
  for (Index i : {0, 7, 20, 250, 499}) {
    const Index lo = std::max<Index>(0, i - 20);
    double mean = 0.0, var = 0.0;
    for (Index k = lo; k <= i; ++k) mean += white(k) / static_cast<double>(i + 1 - lo);
    for (Index k = lo; k <= i; ++k) var += (white(k) - mean) * (white(k) - mean) / static_cast<double>(i + 1 - lo);
    CHECK(r(i) == doctest::Approx(mean / std::max(var, kDispersionVarFloor)).epsilon(1e-12));
  }
}

TEST_CASE("settled score") {
  const SettledScores flat = settled_score(Eigen::VectorXd::Constant(30, 2.0), 5);
  CHECK((flat.settled.array() - 0.5).abs().maxCoeff() < 1e-15);

  Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(30, 0.0, 1.0);
  r(29) = -1e6;
  const SettledScores s = settled_score(r, 5);
  CHECK(s.settled(29) == doctest::Approx(1.0));
  CHECK(s.settled.minCoeff() >= 0.0);
  CHECK(s.settled.maxCoeff() <= 1.0);
  CHECK(((s.settled + s.move).array() - 1.0).abs().maxCoeff() == 0.0);
}

TEST_CASE("hovering reads as settled") {
  // Half a minute of travel at 0.4 m/s, then half a minute in place.
  SimConfig c = testing::drift_config(0.4, 0.02, 1200, 9);
  const Trajectory move = simulate(c, GoalSet{}).trajectory;
  c.drift[0].value = 0.0;
  c.seed = 10;
  c.x0 = move.position(move.size() - 1);
  const Trajectory hover = simulate(c, GoalSet{}).trajectory;
  Eigen::VectorXd x(move.size() + hover.size() - 1);
  x << move.coordinate(0), hover.coordinate(0).tail(hover.size() - 1);
  const GoalScores s = compute_scores(line(x));
  const Index n = s.steps();
  CHECK(s.settled.col(0).tail(n / 2 - 40).mean() > 0.5);
}

TEST_CASE("ECOD gating") {
  SUBCASE("identical features flag nothing") {
    CHECK(ecod_jump_outliers(Eigen::MatrixXd::Constant(50, 2, 0.3)).sum() == 0);
  }
  SUBCASE("a value far above the rest is flagged") {
    Philox rng(4);
    Eigen::MatrixXd f(200, 2);
    for (Index i = 0; i < 200; ++i) f.row(i) << 1.0 + 0.01 * rng.normal(), 1.0 + 0.01 * rng.normal();
    f(117, 0) = 100.0;
    const Eigen::VectorXi flags = ecod_jump_outliers(f, 0.05);
    CHECK(flags(117) == 1);
    CHECK(flags.sum() <= static_cast<int>(std::ceil(0.05 * 200)));
  }
  SUBCASE("input checks") {
    CHECK_THROWS_WITH(ecod_jump_outliers(Eigen::MatrixXd::Zero(10, 2)), doctest::Contains("at least 20"));
    CHECK_THROWS(ecod_jump_outliers(Eigen::MatrixXd::Zero(30, 2), 0.0));
  }
  SUBCASE("flags stay near the contamination budget") {
    const SimResult r = testing::two_goal_run({}, 4);
    const KMSeries raw = raw_moments(increments(r.trajectory, 0));
    const Eigen::MatrixXd f = jump_features(raw, 21);
    const Eigen::VectorXd score = ecod_scores(f);
    const Eigen::VectorXi flags = ecod_jump_outliers(f, 0.05);
    std::vector<double> sorted(score.data(), score.data() + score.size());
    std::sort(sorted.begin(), sorted.end());
    const auto budget = static_cast<Index>(std::ceil(0.05 * static_cast<double>(score.size())));
    const double edge = sorted[sorted.size() - static_cast<std::size_t>(budget)];
    const auto ties = std::count(sorted.begin(), sorted.end(), edge);
    CHECK(flags.sum() <= budget + ties);
  }
}

TEST_CASE("goal dynamics") {
  const GoalSet goals = testing::two_goals();
  const Eigen::VectorXd g = Eigen::VectorXd::Constant(1, 0.1), x = Eigen::VectorXd::Constant(1, 0.4);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(5);
  SUBCASE("a settled operator pulls the goal onto itself") {
    const GoalStep s = goal_dynamics_step(g, x, scores_1d(1.0, 0.0, 1.0), goals, ones, 0.05, 1.0);
    CHECK(s.g_dot(0) == doctest::Approx(0.3));
    CHECK(s.g_next(0) == doctest::Approx(0.1 + 0.3 * 0.05));
    Eigen::VectorXd gi = g;
    for (int i = 0; i < 2000; ++i) gi = goal_dynamics_step(gi, x, scores_1d(1.0, 0.0, 1.0), goals, ones, 0.05, 1.0).g_next;
    CHECK(gi(0) == doctest::Approx(0.4).epsilon(1e-9));
  }
  SUBCASE("zero scores hold the goal") {
    StepScores z = scores_1d(0.0, 0.0, 0.0);
    z.move.setZero();
    const GoalStep s = goal_dynamics_step(g, x, z, goals, ones, 0.05, 1.0);
    CHECK(s.g_dot(0) == 0.0);
    CHECK(s.g_next(0) == g(0));
  }
  SUBCASE("equidistant goals share the weight") {
    const Eigen::VectorXd w = goal_weights(Eigen::VectorXd::Zero(1), goals, 1.0);
    CHECK(w(0) == doctest::Approx(0.5));
    CHECK(w(1) == doctest::Approx(0.5));
    CHECK(goal_weights(g, goals, 0.3).sum() == doctest::Approx(1.0));
  }
  SUBCASE("the terms add up") {
    const StepScores s = scores_1d(0.3, 1.0, -1.0, 0.2);
    const Eigen::MatrixXd t = goal_dynamics_terms(g, x, s, goals, 1.0);
    const Eigen::VectorXd w = goal_weights(g, goals, 1.0);
    CHECK(t(0, 0) == doctest::Approx(0.3 * 0.3));
    CHECK(t(0, 1) == doctest::Approx(-0.7));
    CHECK(t(0, 2) == doctest::Approx(-0.2));
    CHECK(t(0, 3) == doctest::Approx(0.7 * w(0) * (-0.6)));
    CHECK(t(0, 4) == doctest::Approx(0.7 * w(1) * 0.4));
  }
  SUBCASE("pure discovery without goals") {
    const GoalStep s = goal_dynamics_step(g, x, scores_1d(0.5, 0.0, 1.0), GoalSet{}, Eigen::VectorXd::Ones(3), 0.05, 1.0);
    CHECK(s.g_dot(0) == doctest::Approx(0.5 * 0.3 + 0.5));
  }
  SUBCASE("xi length is checked") {
    CHECK_THROWS(goal_dynamics_step(g, x, scores_1d(1, 0, 0), goals, Eigen::VectorXd::Ones(3), 0.05, 1.0));
  }
}

TEST_CASE("nearest-goal traces") {
  const GoalSet goals = testing::two_goals();
  SUBCASE("staying at one goal never switches") {
    Philox rng(2);
    Eigen::VectorXd x(100);
    for (Index i = 0; i < 100; ++i) x(i) = 0.5 + 0.01 * rng.normal();
    const GoalTrace t = infer_goal_trace(line(x), goals, GoalMode::nn);
    CHECK(t.switches.empty());
    CHECK((t.g.array() == 0.5).all());
  }
  SUBCASE("crossing the midpoint switches once") {
    const GoalTrace t = infer_goal_trace(line(Eigen::VectorXd::LinSpaced(100, -0.6, 0.6)), goals, GoalMode::nn);
    CHECK(t.switches.size() == 1);
  }
  SUBCASE("det and nn need goals") {
    CHECK_THROWS(infer_goal_trace(line(Eigen::VectorXd::LinSpaced(50, 0, 1)), GoalSet{}, GoalMode::det));
    CHECK_NOTHROW(infer_goal_trace(line(Eigen::VectorXd::LinSpaced(50, 0, 1)), GoalSet{}, GoalMode::disc));
  }
}

TEST_CASE("traces on simulated two-goal runs") {
  const GoalSet goals = testing::two_goals();
  int ordered = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Trajectory traj = testing::two_goal_run({}, 5000 + s).trajectory;
    const GoalTrace nn = infer_goal_trace(traj, goals, GoalMode::nn);
    const GoalTrace det = infer_goal_trace(traj, goals, GoalMode::det);
    const GoalTrace disc = infer_goal_trace(traj, goals, GoalMode::disc);
    for (const GoalTrace* t : {&nn, &det}) {
      for (Index i = 0; i < t->g.rows(); ++i) CHECK((t->g(i, 0) == -0.5 || t->g(i, 0) == 0.5));
    }
    CHECK(nn.jumps_detected() == det.jumps_detected());
    CHECK(det.jumps_detected() == disc.jumps_detected());
    CHECK(nn.scores.jump == disc.scores.jump);
    ordered += nn.switches.size() <= det.switches.size() && det.switches.size() <= disc.switches.size();
  }
  CHECK(ordered >= 8);
}

TEST_CASE("scores only look backward") {
  const Trajectory traj = testing::two_goal_run({}, 12).trajectory;
  const GoalScores full = compute_scores(traj);
  const GoalScores head = compute_scores(traj.prefix(300));
  const Index n = head.steps();
  CHECK(full.settled.topRows(n) == head.settled);
  CHECK(full.direction.topRows(n) == head.direction);
}

TEST_CASE("goal weights are recovered from a generated trace") {
  const GoalSet goals = testing::two_goals();
  testing::TwoGoalScenario sc;
  sc.lambda = 1.0;
  const Trajectory traj = testing::two_goal_run(sc, 31).trajectory;
  GoalEngineConfig cfg;
  cfg.xi = {0.7, 1.3, 0.9, 1.1, 0.6};
  const GoalTrace trace = infer_goal_trace(traj, goals, GoalMode::disc, cfg);
  REQUIRE(trace.scores.jump_count() > 0);
  const SindyModel m = sindy_goal_fit(traj, trace, goals, cfg);
  CHECK(m.active_count() == 5);
  for (Index k = 0; k < 5; ++k) CHECK(m.coefficients(k) == doctest::Approx(cfg.xi[static_cast<std::size_t>(k)]).epsilon(1e-6));
  CHECK(m.rss * traj.dt() * traj.dt() < 1e-10);

  GoalTrace still = trace;
  still.raw.setConstant(0.2);
  const SindyModel zero = sindy_goal_fit(traj, still, goals, cfg);
  CHECK(zero.coefficients.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("engine config validation") {
  GoalEngineConfig c;
  c.window = 4;
  CHECK_THROWS_WITH(c.validate(), doctest::Contains("odd"));
  c.window = 21;
  c.contamination = 1.5;
  CHECK_THROWS(c.validate());
  CHECK(parse_goal_mode("disc") == GoalMode::disc);
  CHECK(to_string(GoalMode::det) == "det");
  CHECK_THROWS(parse_goal_mode("nearest"));
}

}  // TEST_SUITE
