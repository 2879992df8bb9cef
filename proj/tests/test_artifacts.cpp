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
#include <sstream>

#include "psychic/artifacts.hpp"
#include "psychic/config.hpp"
#include "psychic/serialization.hpp"
#include "scenarios.hpp"

using namespace psychic;

TEST_SUITE("cli-frontend") {

TEST_CASE("serialization helpers") {
  // Standard FNV-1a 64 test vectors.
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
    double back = 0.0;
    REQUIRE(parse_double(format_double(v), back));
    CHECK(back == v);
  }
  CHECK(split_csv_line("a, b ,c") == std::vector<std::string>{"a", "b", "c"});
  const nlohmann::json cfg = {{"window", 21}};
  CHECK(metadata_comment(cfg, 7) == "# config_hash=" + fnv1a_hex(cfg.dump()) + " seed=7");
}

TEST_CASE("pdf-curve of a Gaussian integrates to one") {
  std::ostringstream out;
  write_pdf_curve_csv(out, {{"nll", {0.2, 0.3, 0.0, 0.0, 0.0}}}, 0.1, 0.05, 2001, "# config_hash=0 seed=0");
  std::istringstream in(out.str());
  CHECK(out.str().rfind("# config_hash=", 0) == 0);
  const CsvTable t = read_csv(in);
  CHECK(t.header == std::vector<std::string>{"model", "x", "pdf", "logp"});
  const std::vector<double> x = t.numeric_column("x"), pdf = t.numeric_column("pdf");
  double area = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) area += 0.5 * (pdf[i] + pdf[i - 1]) * (x[i] - x[i - 1]);
  CHECK(area == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("jump-markers on a jump-free series is empty") {
  const Trajectory steady = simulate(testing::drift_config(0.3, 0.0, 200, 1), GoalSet{}).trajectory;
  std::ostringstream out;
  write_jump_markers_csv(out, {raw_moments(increments(steady, 0))}, 0.0, 21, 0.05, "# config_hash=0 seed=0");
  std::istringstream in(out.str());
  const CsvTable t = read_csv(in);
  CHECK(t.header == std::vector<std::string>{"t", "dim", "step"});
  CHECK(t.rows.empty());
}

TEST_CASE("goal traces round-trip") {
  const Trajectory traj = testing::two_goal_run({}, 3).trajectory;
  const GoalTrace trace = infer_goal_trace(traj, testing::two_goals(), GoalMode::det);
  std::ostringstream out;
  write_goal_trace_csv(out, traj, trace, "# config_hash=0 seed=0");
  std::istringstream in(out.str());
  const GoalTraceTable back = read_goal_trace_csv(in);
  CHECK(back.g == trace.g);
  CHECK(back.t == traj.times());
  CHECK(back.jump.sum() == trace.jumps_detected());
  CHECK(back.switched.sum() == static_cast<int>(trace.switches.size()));
  CHECK(((back.settled + back.move).array() - 1.0).abs().maxCoeff() < 1e-12);

  // A trace written from a table fits the same regression models.
  HarnessConfig cfg;
  const std::vector<KmModels> a = fit_sindy_model(traj, trace, cfg);
  GoalTrace replay;
  replay.g = back.g;
  const std::vector<KmModels> b = fit_sindy_model(traj, replay, cfg);
  CHECK(a[0].m1.coefficients == b[0].m1.coefficients);
}

TEST_CASE("KM tables round-trip") {
  const Trajectory traj = testing::two_goal_run({}, 6).trajectory;
  const KMSeries k = estimate_km(traj, 0);
  std::ostringstream out;
  write_km_csv(out, k, 0.0, "# config_hash=0 seed=0");
  std::istringstream in(out.str());
  const KMSeries back = read_km_csv(in);
  CHECK(back.m1 == k.m1);
  CHECK(back.m6 == k.m6);
  CHECK(back.lambda == k.lambda);
  CHECK(back.dt == doctest::Approx(k.dt));
}

TEST_CASE("label files") {
  const GoalSet goals = testing::two_goals();
  std::istringstream by_name("label\na\nb\n1\n-1\n");
  CHECK(read_labels_csv(by_name, goals) == std::vector<int>{0, 1, 1, -1});
  std::istringstream unknown("label\nc\n");
  CHECK_THROWS_AS(read_labels_csv(unknown, goals), ParseError);
}

TEST_CASE("model files") {
  const Trajectory traj = testing::two_goal_run({}, 8).trajectory;
  const GoalSet goals = testing::two_goals();
  const GoalTrace trace = infer_goal_trace(traj, goals, GoalMode::nn);
  SUBCASE("likelihood model") {
    const NllModel m = fit_nll_model(traj, trace, goals, NllFitOptions{});
    const ModelFile f = model_from_json(nll_model_json(m, goals, traj.dt(), 8));
    CHECK(f.kind == ModelKind::nll);
    CHECK(f.labels == std::vector<std::string>{"a", "b"});
    REQUIRE(f.nll.size() == 2);
    CHECK(f.nll[1][0].sigma_g == m.params[1][0].sigma_g);
    CHECK(f.nll[0][0].lambda == m.params[0][0].lambda);
  }
  SUBCASE("regression model") {
    const std::vector<KmModels> m = fit_sindy_model(traj, trace, HarnessConfig{});
    const ModelFile f = model_from_json(sindy_model_json(m, "default2", traj.dt()));
    CHECK(f.kind == ModelKind::sindy);
    const ReachParams p = model_params(f, Eigen::VectorXd::Constant(1, 0.1), goals);
    REQUIRE(p.size() == 2);
    CHECK(p[1][0].mu_g == predict_km(m[0], 0.1, 0.5).params.mu_g);

    // The grid only sees parameters, whatever produced them.
    ModelFile as_nll;
    as_nll.kind = ModelKind::nll;
    as_nll.dt = traj.dt();
    as_nll.dims = 1;
    as_nll.nll = p;
    const Eigen::VectorXd xs = Eigen::VectorXd::Constant(1, 0.1);
    const GridSpec spec = default_grid_spec(p, xs);
    const ReachabilityGrid a = reach_grid(p, xs, spec);
    const ReachabilityGrid b = reach_grid(model_params(as_nll, xs, goals), xs, spec);
    CHECK((a.collapsed == b.collapsed).all());
  }
  CHECK_THROWS(model_from_json({{"kind", "oracle"}}));
}

TEST_CASE("reach tables") {
  const ReachParams p = {{{0.1, 0.2, 0, 0, 0}}};
  GridSpec spec;
  spec.axes = {{-1, 1, 11}};
  spec.slices = {0.5, 1.0};
  std::ostringstream out;
  write_reach_csv(out, reach_grid(p, Eigen::VectorXd::Zero(1), spec), "# config_hash=0 seed=0");
  std::istringstream in(out.str());
  const CsvTable t = read_csv(in);
  CHECK(t.header == std::vector<std::string>{"t", "x", "logp"});
  CHECK(t.rows.size() == 33);
  CHECK(t.rows.back()[0] == "collapsed");
}

TEST_CASE("run configuration") {
  const RunConfig d;
  CHECK_NOTHROW(d.validate());
  CHECK(d.seed == 0);
  CHECK(d.window == 21);
  const nlohmann::json j = d.to_json();
  for (const auto& [key, value] : j.items()) {
    bool listed = false;
    for (const DefaultEntry& e : defaults_table()) listed = listed || key == e.key;
    CAPTURE(key);
    CHECK(listed);
  }
  CHECK(RunConfig::from_json(j).to_json() == j);
  CHECK_THROWS_WITH(RunConfig::from_json({{"windw", 21}}), doctest::Contains("windw"));

  RunConfig bad;
  bad.window = 20;
  CHECK_THROWS_WITH(bad.validate(), doctest::Contains("window"));
  bad.window = 21;
  bad.contamination = 2.0;
  CHECK_THROWS_WITH(bad.validate(), doctest::Contains("contamination"));

  RunConfig c;
  c.window = 31;
  c.starts = 3;
  c.relax_mu_beta = true;
  const HarnessConfig h = c.harness();
  CHECK(h.goal.window == 31);
  CHECK(h.nll.starts == 3);
  CHECK(h.sindy.relax_mu_beta);
}

}  // TEST_SUITE
