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

#include "psychic/eval_harness.hpp"
#include "psychic/rng.hpp"
#include "psychic/stats.hpp"
#include "scenarios.hpp"

using namespace psychic;

TEST_SUITE("stats") {

// Reference values from scipy.stats.
TEST_CASE("distribution helpers") {
  CHECK(stats::student_t_quantile(0.975, 9) == doctest::Approx(2.2621571628540993).epsilon(1e-10));
  CHECK(stats::student_t_quantile(0.975, 2) == doctest::Approx(4.302652729696142).epsilon(1e-10));
  CHECK(stats::student_t_cdf(1.5, 4) == doctest::Approx(0.896).epsilon(1e-10));
  CHECK(stats::incomplete_beta(2, 3, 0.4) == doctest::Approx(0.5248).epsilon(1e-12));
  CHECK(stats::normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  const Eigen::VectorXd v = (Eigen::VectorXd(4) << 1, 2, 3, 10).finished();
  CHECK(stats::skewness(v) == doctest::Approx(1.763632614803888).epsilon(1e-12));
  CHECK(stats::median(v) == 2.5);
  CHECK(stats::mad(std::vector<double>{1, 2, 3, 10}) == 1.0);
  CHECK(stats::quantile(std::vector<double>{1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(stats::log_factorial(200) == doctest::Approx(std::lgamma(201.0)).epsilon(1e-13));
}

}  // TEST_SUITE

TEST_SUITE("eval-harness") {

TEST_CASE("residual sum of squares") {
  Philox rng(1);
  Eigen::MatrixXd truth(30, 3);
  for (Index i = 0; i < truth.size(); ++i) truth.data()[i] = rng.normal();
  CHECK(rss(truth, truth) == 0.0);
  const Eigen::MatrixXd shifted = truth.array() + 0.1;
  CHECK(rss(shifted.leftCols(1), truth.leftCols(1)) == doctest::Approx(30 * 0.01));
  Eigen::MatrixXd noisy = truth;
  for (Index i = 0; i < noisy.size(); ++i) noisy.data()[i] += 0.2 * rng.normal();
  const Eigen::MatrixXd perm_a = noisy(Eigen::all, std::vector<Index>{2, 0, 1});
  const Eigen::MatrixXd perm_b = truth(Eigen::all, std::vector<Index>{2, 0, 1});
  CHECK(rss(perm_a, perm_b) == doctest::Approx(rss(noisy, truth)).epsilon(1e-14));
  CHECK(rss(noisy.topRows(12), truth.topRows(12)) + rss(noisy.bottomRows(18), truth.bottomRows(18)) ==
        doctest::Approx(rss(noisy, truth)).epsilon(1e-14));
  CHECK_THROWS(rss(noisy, truth.topRows(2)));
}

TEST_CASE("geometric mean and interval") {
  const std::vector<double> decades = {1.0, 10.0, 100.0};
  CHECK(aggregate(decades).geometric_mean == doctest::Approx(10.0).epsilon(1e-14));

  const std::vector<double> one = {0.37};
  const Aggregate a1 = aggregate(one);
  CHECK(a1.geometric_mean == doctest::Approx(0.37));
  CHECK(a1.ci_low == a1.geometric_mean);
  CHECK(a1.ci_high == a1.geometric_mean);

  // scipy: exp(mean(log v)) and exp(mean +- t(0.975, 4) s / sqrt(5)).
  const std::vector<double> v = {0.5, 1.7, 2.2, 8.0, 3.1};
  const Aggregate a = aggregate(v);
  CHECK(a.geometric_mean == doctest::Approx(2.1540642721687395).epsilon(1e-12));
  CHECK(a.ci_low == doctest::Approx(0.6181250646804028).epsilon(1e-9));
  CHECK(a.ci_high == doctest::Approx(7.506560005025712).epsilon(1e-9));
  CHECK(a.ci_low <= a.geometric_mean);
  CHECK(a.geometric_mean <= a.ci_high);

  const std::vector<double> zeros = {0.0, 1.0};
  CHECK(aggregate(zeros).floored == 1);
  CHECK_THROWS(aggregate(std::vector<double>{}));
}

TEST_CASE("geometric mean of lognormal samples") {
  int inside = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Philox rng(500 + s);
    std::vector<double> v(1000);
    for (double& x : v) x = std::exp(rng.normal());
    const double gm = aggregate(v).geometric_mean;
    inside += gm >= 0.94 && gm <= 1.07;
  }
  CHECK(inside >= 95);
}

TEST_CASE("strategy names") {
  const auto all = all_strategies();
  REQUIRE(all.size() == 6);
  for (const StrategyId& s : all) CHECK(parse_strategy(s.name()) == s);
  CHECK(parse_strategy("sindy-det").model == ModelKind::sindy);
  CHECK_THROWS(parse_strategy("sindy-best"));
  CHECK(parse_run_mode("online") == RunMode::online);
}

TEST_CASE("offline runs of every strategy") {
  testing::TwoGoalScenario sc;
  sc.steps = 300;
  const Trajectory traj = testing::two_goal_run(sc, 41).trajectory;
  const GoalSet goals = testing::two_goals();
  double nll_jumps = -1.0;
  for (const StrategyId& s : all_strategies()) {
    CAPTURE(s.name());
    const StrategyRun run = run_offline(traj, goals, s);
    CHECK(run.steps() == traj.size() - 1);
    CHECK(std::isfinite(run.rss));
    CHECK(run.rss == doctest::Approx(rss(run.predictions, traj.positions().bottomRows(run.steps()))));
    if (nll_jumps < 0) nll_jumps = static_cast<double>(run.jumps);
    CHECK(static_cast<double>(run.jumps) == nll_jumps);
  }
}

TEST_CASE("online predictions only use the past") {
  testing::TwoGoalScenario sc;
  sc.steps = 120;
  const Trajectory traj = testing::two_goal_run(sc, 42).trajectory;
  const GoalSet goals = testing::two_goals();
  for (const char* name : {"nll-nn", "sindy-det", "sindy-disc"}) {
    CAPTURE(name);
    const StrategyId s = parse_strategy(name);
    const StrategyRun full = run_online(traj, goals, s);
    const StrategyRun part = run_online(traj.prefix(90), goals, s);
    CHECK(full.first_target == 40);
    REQUIRE(part.steps() == 50);
    CHECK(part.predictions == full.predictions.topRows(50));
  }
  CHECK_THROWS(run_online(traj.prefix(30), goals, parse_strategy("nll-nn")));
}

TEST_CASE("online playback of a still hand") {
  const Index n = 80;
  const Trajectory still(Eigen::VectorXd::LinSpaced(n, 0.0, 0.05 * (n - 1)), Eigen::MatrixXd::Constant(n, 1, 0.5), 0.05);
  const GoalSet goals = testing::two_goals();
  for (const char* name : {"nll-nn", "sindy-nn"}) {
    const StrategyRun run = run_online(still, goals, parse_strategy(name));
    const double cell = 2.0 * map_envelope({0.0, kScaleFloor, 0, 0, 0}, 0.05) / 200.0;
    CHECK(run.rss <= cell * cell * static_cast<double>(run.steps()));
  }
}

TEST_CASE("report assembly") {
  testing::TwoGoalScenario sc;
  sc.steps = 200;
  std::vector<EvalInput> inputs;
  for (std::uint64_t s = 0; s < 2; ++s) {
    inputs.push_back(EvalInput{"t" + std::to_string(s), "two-goal", testing::two_goal_run(sc, 60 + s).trajectory,
                               testing::two_goals()});
  }
  const std::vector<StrategyId> nll = {parse_strategy("nll-nn"), parse_strategy("nll-det"), parse_strategy("nll-disc")};
  const EvalReport a = run_matrix(inputs, nll, {RunMode::offline}, {}, 1);
  const EvalReport b = run_matrix(inputs, nll, {RunMode::offline}, {}, 2);
  CHECK(a.all_ok());
  CHECK(report_json(a).dump() == report_json(b).dump());
  CHECK(table_report_csv(a) == table_report_csv(b));
  REQUIRE(a.rows.size() == 3);
  for (const EvalRow& r : a.rows) CHECK(r.mean_jumps == a.rows[0].mean_jumps);

  const EvalReport single = run_matrix({inputs[0]}, {nll[0]}, {RunMode::offline}, {}, 1);
  CHECK(single.rows.size() == 1);
  CHECK(single.cells.size() == 1);
  const std::string csv = table_report_csv(single);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);

  const EvalReport none = run_matrix(inputs, {}, {RunMode::offline}, {}, 1);
  CHECK(none.rows.empty());
  CHECK_NOTHROW(table_report_text(none));
}

}  // TEST_SUITE
