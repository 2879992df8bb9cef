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

#include "psychic/config.hpp"

#include <array>
#include <cmath>

#include "psychic/error.hpp"

namespace psychic {

namespace {

constexpr std::array<DefaultEntry, 15> kDefaults = {{
    {"window", "21", "odd KM / score window W in samples (>= 3)"},
    {"library", "default2", "SINDy library: default2 = {1, X, g, X^2, X*g, g^2}, default1 = {1, X, g}"},
    {"epsilon_ssr", "0.1", "SSR keeps the sparsest model with rss <= (1 + eps) min rss"},
    {"contamination", "0.05", "ECOD contamination q; steps above the (1 - q) score quantile are jumps"},
    {"temperature", "0", "softmax temperature T_w in m; 0 = mean pairwise goal distance (1 m for one goal)"},
    {"xi", "[]", "goal-dynamics weights, 3 + K entries; empty = all 1"},
    {"direction_deadband", "0.05", "|windowed mean M1| below this (m/s) gives v_dir = 0"},
    {"switch_threshold", "0.01", "disc-mode switch when the goal moves more than this (m) in one step"},
    {"grid_cells", "201", "cells per axis for MAP and reachability grids"},
    {"slices", "[0.5, 1, 2, 4, 8]", "reachability slice times in s"},
    {"warmup", "40", "samples before the first online prediction (>= 21)"},
    {"starts", "8", "likelihood-fit multi-starts"},
    {"seed", "0", "seed for every stochastic choice; PSYCHIC_SEED, overridden by --seed"},
    {"relax_mu_beta", "false", "fit mu_beta from the third moment instead of holding it at 0"},
    {"normalize_mixture", "false", "divide the reachability goal mixture by K"},
}};

[[noreturn]] void invalid(const std::string& key, const std::string& range) {
  throw Error("invalid value for '" + key + "': must be " + range);
}

}  // namespace

std::span<const DefaultEntry> defaults_table() { return kDefaults; }

void RunConfig::validate() const {
  if (window < 3 || window % 2 == 0) invalid("window", "odd and >= 3 (window must be odd)");
  if (library != "default1" && library != "default2") invalid("library", "default1 or default2");
  if (!(epsilon_ssr >= 0.0 && epsilon_ssr <= 10.0)) invalid("epsilon_ssr", "in [0, 10]");
  if (!(contamination > 0.0 && contamination < 0.5)) invalid("contamination", "in (0, 0.5)");
  if (!(temperature >= 0.0)) invalid("temperature", ">= 0");
  for (double v : xi) {
    if (!std::isfinite(v)) invalid("xi", "finite");
  }
  if (!(direction_deadband >= 0.0)) invalid("direction_deadband", ">= 0");
  if (!(switch_threshold >= 0.0)) invalid("switch_threshold", ">= 0");
  if (grid_cells < 3 || grid_cells > 100001) invalid("grid_cells", "in [3, 100001]");
  if (slices.empty()) invalid("slices", "non-empty");
  for (double t : slices) {
    if (!(t > 0.0 && t <= 60.0)) invalid("slices", "in (0, 60] s");
  }
  if (warmup < 21) invalid("warmup", ">= 21");
  if (starts < 1 || starts > 64) invalid("starts", "in [1, 64]");
}

HarnessConfig RunConfig::harness() const {
  HarnessConfig h;
  h.goal.window = window;
  h.goal.direction_deadband = direction_deadband;
  h.goal.contamination = contamination;
  h.goal.switch_threshold = switch_threshold;
  h.goal.xi = xi;
  h.goal.temperature = temperature;
  h.nll.starts = starts;
  h.nll.seed = seed;
  h.library = LibrarySpec::named(library);
  h.sindy.ssr.epsilon = epsilon_ssr;
  h.sindy.ssr.drop_dependent = true;
  h.sindy.relax_mu_beta = relax_mu_beta;
  h.grid_cells = grid_cells;
  h.warmup = warmup;
  return h;
}

nlohmann::json RunConfig::to_json() const {
  return {{"window", window},
          {"library", library},
          {"epsilon_ssr", epsilon_ssr},
          {"contamination", contamination},
          {"temperature", temperature},
          {"xi", xi},
          {"direction_deadband", direction_deadband},
          {"switch_threshold", switch_threshold},
          {"grid_cells", grid_cells},
          {"slices", slices},
          {"warmup", warmup},
          {"starts", starts},
          {"seed", seed},
          {"relax_mu_beta", relax_mu_beta},
          {"normalize_mixture", normalize_mixture}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("run config must be a JSON object");
  RunConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "window") {
        c.window = value.get<Index>();
      } else if (key == "library") {
        c.library = value.get<std::string>();
      } else if (key == "epsilon_ssr") {
        c.epsilon_ssr = value.get<double>();
      } else if (key == "contamination") {
        c.contamination = value.get<double>();
      } else if (key == "temperature") {
        c.temperature = value.get<double>();
      } else if (key == "xi") {
        c.xi = value.get<std::vector<double>>();
      } else if (key == "direction_deadband") {
        c.direction_deadband = value.get<double>();
      } else if (key == "switch_threshold") {
        c.switch_threshold = value.get<double>();
      } else if (key == "grid_cells") {
        c.grid_cells = value.get<Index>();
      } else if (key == "slices") {
        c.slices = value.get<std::vector<double>>();
      } else if (key == "warmup") {
        c.warmup = value.get<Index>();
      } else if (key == "starts") {
        c.starts = value.get<int>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "relax_mu_beta") {
        c.relax_mu_beta = value.get<bool>();
      } else if (key == "normalize_mixture") {
        c.normalize_mixture = value.get<bool>();
      } else {
        throw Error("unknown run config key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error("run config key '" + key + "': " + e.what());
    }
  }
  c.validate();
  return c;
}

}  // namespace psychic
