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

#include "psychic/sde_simulator.hpp"

#include <cmath>
#include <set>

#include "psychic/error.hpp"
#include "psychic/parallel.hpp"
#include "psychic/rng.hpp"

namespace psychic {

void SimConfig::validate(const GoalSet& goals) const {
  if (dims() < 1) throw Error("sim config: x0 must have at least one coordinate");
  if (!x0.allFinite()) throw Error("sim config: x0 must be finite");
  if (static_cast<Index>(drift.size()) != dims()) {
    throw Error("sim config: need one drift spec per dimension");
  }
  if (!(sigma_g >= 0.0) || !(lambda >= 0.0) || !(sigma_beta >= 0.0) || !std::isfinite(mu_beta)) {
    throw Error("sim config: sigma_g, lambda, sigma_beta must be >= 0");
  }
  if (!(dt > 0.0)) throw Error("sim config: dt must be positive");
  if (steps < 1) throw Error("sim config: steps must be >= 1");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i].goal < 0 || schedule[i].goal >= goals.size()) {
      throw Error("sim config: schedule references a missing goal");
    }
    if (i > 0 && !(schedule[i].time > schedule[i - 1].time)) {
      throw Error("sim config: schedule times must increase");
    }
  }
  if (!goals.empty() && goals.dims() != dims()) throw Error("sim config: goal dimension mismatch");
  bool reverting = false;
  for (const auto& d : drift) reverting |= d.kind == DriftKind::mean_reverting;
  if (reverting && goals.empty()) throw Error("sim config: mean-reverting drift needs goals");
}

namespace {

Index active_goal_at(const SimConfig& config, const GoalSet& goals, double t) {
  if (goals.empty()) return -1;
  if (config.schedule.empty()) return 0;
  Index g = config.schedule.front().goal;
  for (const auto& s : config.schedule) {
    if (s.time <= t + 1e-12) g = s.goal;
  }
  return g;
}

}  // namespace

SimResult simulate(const SimConfig& config, const GoalSet& goals) {
  config.validate(goals);
  const Index n = config.dims();
  const Index samples = config.steps + 1;
  Eigen::VectorXd t(samples);
  Eigen::MatrixXd x(samples, n);
  std::vector<Index> active(static_cast<std::size_t>(samples));
  std::vector<JumpEvent> jumps;

  std::vector<Philox> rngs;
  for (Index d = 0; d < n; ++d) rngs.emplace_back(config.seed, static_cast<std::uint64_t>(d));

  const double sqrt_dt = std::sqrt(config.dt);
  const double jump_rate = config.lambda * config.dt;
  x.row(0) = config.x0.transpose();
  for (Index i = 0; i < samples; ++i) {
    t(i) = static_cast<double>(i) * config.dt;
    active[static_cast<std::size_t>(i)] = active_goal_at(config, goals, t(i));
  }
  for (Index i = 0; i < config.steps; ++i) {
    const Index g = active[static_cast<std::size_t>(i)];
    for (Index d = 0; d < n; ++d) {
      Philox& rng = rngs[static_cast<std::size_t>(d)];
      const DriftSpec& spec = config.drift[static_cast<std::size_t>(d)];
      const double xi = x(i, d);
      const double mu = spec.kind == DriftKind::constant
                            ? spec.value
                            : spec.value * (goals[g].position(d) - xi);
      double step = mu * config.dt + config.sigma_g * sqrt_dt * rng.normal();
      const std::uint64_t kappa = rng.poisson(jump_rate);
      double jump = 0.0;
      for (std::uint64_t j = 0; j < kappa; ++j) jump += config.mu_beta + config.sigma_beta * rng.normal();
      if (kappa > 0 && jump != 0.0) jumps.push_back({i, d, jump});
      step += jump;
      x(i + 1, d) = xi + step;
    }
  }
  return SimResult{Trajectory(std::move(t), std::move(x), config.dt), std::move(jumps),
                   std::move(active)};
}

BatchResult simulate_batch(const std::vector<SimConfig>& configs, const GoalSet& goals,
                           const std::vector<std::uint64_t>& seeds, unsigned threads) {
  if (seeds.empty()) throw Error("simulate_batch: empty seed list");
  if (configs.size() != 1 && configs.size() != seeds.size()) {
    throw Error("simulate_batch: need one config or one config per seed");
  }
  BatchResult out;
  std::set<std::uint64_t> seen;
  for (auto s : seeds) {
    if (!seen.insert(s).second) out.warnings.push_back("duplicate seed " + std::to_string(s));
  }
  std::vector<std::optional<SimResult>> slots(seeds.size());
  parallel_for(
      seeds.size(),
      [&](std::size_t i) {
        SimConfig c = configs.size() == 1 ? configs.front() : configs[i];
        c.seed = seeds[i];
        slots[i].emplace(simulate(c, goals));
      },
      threads);
  out.results.reserve(seeds.size());
  for (auto& s : slots) out.results.push_back(std::move(*s));
  return out;
}

SimConfig sim_config_from_json(const nlohmann::json& j, GoalSet* goals_out) {
  SimConfig c;
  static const std::set<std::string> kKeys = {"dt",         "steps",    "seed",  "sigma_g",
                                              "lambda",     "mu_beta",  "sigma_beta", "x0",
                                              "drift",      "schedule", "goals"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!kKeys.count(it.key())) throw Error("sim config: unknown key '" + it.key() + "'");
  }
  c.dt = j.value("dt", 0.05);
  c.steps = j.value("steps", Index{1});
  c.seed = j.value("seed", std::uint64_t{0});
  c.sigma_g = j.value("sigma_g", 0.0);
  c.lambda = j.value("lambda", 0.0);
  c.mu_beta = j.value("mu_beta", 0.0);
  c.sigma_beta = j.value("sigma_beta", 0.0);
  const auto x0 = j.at("x0").get<std::vector<double>>();
  c.x0 = Eigen::Map<const Eigen::VectorXd>(x0.data(), static_cast<Index>(x0.size()));

  auto parse_drift = [](const nlohmann::json& d) {
    DriftSpec s;
    const std::string kind = d.value("kind", "constant");
    if (kind == "constant") s.kind = DriftKind::constant;
    else if (kind == "mean_reverting") s.kind = DriftKind::mean_reverting;
    else throw Error("sim config: unknown drift kind '" + kind + "'");
    s.value = d.value("value", 0.0);
    return s;
  };
  if (j.contains("drift")) {
    const auto& d = j["drift"];
    if (d.is_array()) {
      for (const auto& e : d) c.drift.push_back(parse_drift(e));
    } else {
      c.drift.assign(static_cast<std::size_t>(c.dims()), parse_drift(d));
    }
  } else {
    c.drift.assign(static_cast<std::size_t>(c.dims()), DriftSpec{});
  }
  if (j.contains("schedule")) {
    for (const auto& s : j["schedule"]) c.schedule.push_back({s.at("time").get<double>(), s.at("goal").get<Index>()});
  }
  GoalSet goals;
  if (j.contains("goals")) {
    std::vector<Goal> gs;
    for (const auto& g : j["goals"]) {
      const auto pos = g.at("pos").get<std::vector<double>>();
      gs.push_back({g.value("label", "g" + std::to_string(gs.size())),
                    Eigen::Map<const Eigen::VectorXd>(pos.data(), static_cast<Index>(pos.size()))});
    }
    goals = GoalSet(std::move(gs));
  }
  c.validate(goals);
  if (goals_out) *goals_out = std::move(goals);
  return c;
}

nlohmann::json sim_config_to_json(const SimConfig& c, const GoalSet& goals) {
  nlohmann::json j;
  j["dt"] = c.dt;
  j["steps"] = c.steps;
  j["seed"] = c.seed;
  j["sigma_g"] = c.sigma_g;
  j["lambda"] = c.lambda;
  j["mu_beta"] = c.mu_beta;
  j["sigma_beta"] = c.sigma_beta;
  j["x0"] = std::vector<double>(c.x0.data(), c.x0.data() + c.x0.size());
  j["drift"] = nlohmann::json::array();
  for (const auto& d : c.drift) {
    j["drift"].push_back({{"kind", d.kind == DriftKind::constant ? "constant" : "mean_reverting"},
                          {"value", d.value}});
  }
  j["schedule"] = nlohmann::json::array();
  for (const auto& s : c.schedule) j["schedule"].push_back({{"time", s.time}, {"goal", s.goal}});
  j["goals"] = nlohmann::json::array();
  for (const auto& g : goals.goals()) {
    j["goals"].push_back({{"label", g.label},
                          {"pos", std::vector<double>(g.position.data(), g.position.data() + g.position.size())}});
  }
  return j;
}

nlohmann::json truth_to_json(const SimResult& r, std::uint64_t seed) {
  nlohmann::json j;
  j["seed"] = seed;
  j["jumps"] = nlohmann::json::array();
  for (const auto& e : r.jumps) j["jumps"].push_back({{"step", e.step}, {"dim", e.dim}, {"size", e.size}});
  j["active_goal"] = r.active_goal;
  return j;
}

}  // namespace psychic
