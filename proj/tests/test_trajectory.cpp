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

#include <sstream>

#include "psychic/error.hpp"
#include "psychic/trajectory.hpp"
#include "scenarios.hpp"

using namespace psychic;

TEST_SUITE("trajectory") {

TEST_CASE("three rows of t,x load as one dimension") {
  std::istringstream in("t,x\n0,0.1\n0.05,0.2\n0.10,0.25\n");
  const Trajectory t = load_trajectory(in);
  CHECK(t.dims() == 1);
  CHECK(t.size() == 3);
  CHECK(t.dt() == doctest::Approx(0.05));
}

TEST_CASE("20 Hz capture gives dt 0.05") {
  std::ostringstream csv;
  csv << "t,x,y,z\n";
  for (int i = 0; i < 100; ++i) csv << i / 20.0 << "," << i * 0.01 << ",0,1\n";
  std::istringstream in(csv.str());
  const Trajectory t = load_trajectory(in);
  CHECK(t.dims() == 3);
  CHECK(t.dt() == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(t.is_uniform());
}

TEST_CASE("decreasing time is rejected") {
  std::istringstream in("t,x\n0,0\n0.1,1\n0.05,2\n");
  CHECK_THROWS_WITH_AS(load_trajectory(in), doctest::Contains("non-monotonic time"), ParseError);
}

TEST_CASE("malformed rows report their line") {
  std::istringstream in("t,x\n0,0\n0.05,abc\n");
  try {
    load_trajectory(in);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream short_row("t,x,y\n0,0,0\n0.05,1\n");
  CHECK_THROWS_AS(load_trajectory(short_row), ParseError);
}

TEST_CASE("a single sample is rejected") {
  std::istringstream in("t,x\n0,0\n");
  CHECK_THROWS_AS(load_trajectory(in), Error);
}

TEST_CASE("write then load round-trips bit for bit") {
  const SimResult r = simulate(testing::drift_config(0.3, 0.2, 200, 9), GoalSet{});
  std::ostringstream a;
  write_trajectory(a, r.trajectory);
  std::istringstream in(a.str());
  const Trajectory back = load_trajectory(in);
  CHECK(back.times() == r.trajectory.times());
  CHECK(back.positions() == r.trajectory.positions());
  std::ostringstream b;
  write_trajectory(b, back);
  CHECK(a.str() == b.str());
}

TEST_CASE("gaps are filled by resampling") {
  std::istringstream in("t,x\n0,0\n0.05,0.05\n0.1,0.1\n0.3,0.3\n0.35,0.35\n");
  const Trajectory t = load_trajectory(in);
  CHECK(t.size() == 8);
  CHECK(t.is_uniform());
  CHECK(t.positions()(4, 0) == doctest::Approx(0.2));
}

TEST_CASE("resample_uniform") {
  SUBCASE("identity on uniform input") {
    const SimResult r = simulate(testing::drift_config(0.1, 0.1, 50, 3), GoalSet{});
    const Trajectory u = resample_uniform(r.trajectory, r.trajectory.dt());
    CHECK(u.size() == r.trajectory.size());
    CHECK((u.positions() - r.trajectory.positions()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("idempotent") {
    Eigen::VectorXd times(4);
    times << 0.0, 0.07, 0.2, 0.31;
    Eigen::MatrixXd pos(4, 1);
    pos << 0.0, 1.0, -1.0, 2.0;
    const Trajectory once = resample_uniform(Trajectory(times, pos, 0.05), 0.05);
    const Trajectory twice = resample_uniform(once, 0.05);
    CHECK(twice.times() == once.times());
    CHECK(twice.positions() == once.positions());
  }
  SUBCASE("linear midpoint") {
    Eigen::VectorXd times(2);
    times << 0.0, 1.0;
    Eigen::MatrixXd pos(2, 1);
    pos << 0.0, 1.0;
    const Trajectory u = resample_uniform(Trajectory(times, pos, 1.0), 0.5);
    REQUIRE(u.size() == 3);
    CHECK(u.times()(1) == doctest::Approx(0.5));
    CHECK(u.positions()(1, 0) == doctest::Approx(0.5));
  }
  SUBCASE("dt longer than the trajectory") {
    Eigen::VectorXd times(2);
    times << 0.0, 1.0;
    const Trajectory t(times, Eigen::MatrixXd::Zero(2, 1), 1.0);
    CHECK_THROWS_WITH(resample_uniform(t, 2.0), doctest::Contains("dt larger than total duration"));
  }
}

TEST_CASE("increments") {
  Eigen::VectorXd times(3);
  times << 0.0, 0.05, 0.1;
  Eigen::MatrixXd pos(3, 1);
  pos << 0.0, 1.0, 3.0;
  const Trajectory t(times, pos, 0.05);
  const IncrementSeries inc = increments(t, 0);
  REQUIRE(inc.size() == 2);
  CHECK(inc.values(0) == 1.0);
  CHECK(inc.values(1) == 2.0);
  CHECK_THROWS(increments(t, 1));

  const Trajectory flat(times, Eigen::MatrixXd::Constant(3, 1, 4.2), 0.05);
  CHECK(increments(flat, 0).values.isZero(0.0));
}

TEST_CASE("pure drift increments equal c dt") {
  const SimResult r = simulate(testing::drift_config(0.4, 0.0, 100, 1), GoalSet{});
  const IncrementSeries inc = increments(r.trajectory, 0);
  CHECK((inc.values.array() - 0.4 * 0.05).abs().maxCoeff() < 1e-12);
}

TEST_CASE("increments sum to the net displacement") {
  const SimResult r = simulate(testing::drift_config(0.1, 0.3, 5000, 17), GoalSet{});
  const IncrementSeries inc = increments(r.trajectory, 0);
  const double net = r.trajectory.positions()(r.trajectory.size() - 1, 0) - r.trajectory.positions()(0, 0);
  CHECK(std::abs(inc.values.sum() - net) <= 1e-9 * static_cast<double>(inc.size()));
}

TEST_CASE("goal sets") {
  std::istringstream in(R"({"goals": [{"label": "cup", "pos": [0, 1]}, {"label": "box", "pos": [1, 0]}]})");
  const GoalSet g = load_goals(in);
  CHECK(g.size() == 2);
  CHECK(g.dims() == 2);
  CHECK(g.nearest(Eigen::Vector2d(0.9, 0.2)) == 1);
  CHECK(g.mean_pairwise_distance() == doctest::Approx(std::sqrt(2.0)));

  std::ostringstream out;
  write_goals(out, g);
  std::istringstream again(out.str());
  CHECK(load_goals(again)[0].label == "cup");

  CHECK_THROWS(GoalSet({{"a", Eigen::Vector2d(0, 0)}, {"b", Eigen::Vector2d(0, 0)}}));
  CHECK_THROWS(GoalSet({{"a", Eigen::Vector2d(0, 0)}, {"b", Eigen::Vector3d(0, 0, 1)}}));
  CHECK(GoalSet{}.empty());
}

}  // TEST_SUITE
