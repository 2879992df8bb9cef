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

// Tunable settings shared by the command-line tools, with every default in
// one table.

#ifndef PSYCHIC_CONFIG_HPP_
#define PSYCHIC_CONFIG_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "psychic/eval_harness.hpp"

namespace psychic {

struct DefaultEntry {
  const char* key;
  const char* value;
  const char* meaning;
};

// key, default, meaning. Keys match RunConfig's JSON form.
std::span<const DefaultEntry> defaults_table();

struct RunConfig {
  Index window = 21;
  std::string library = "default2";
  double epsilon_ssr = 0.1;
  double contamination = 0.05;
  double temperature = 0.0;  // <= 0: mean pairwise goal distance
  std::vector<double> xi;     // empty: all 1
  double direction_deadband = 0.05;
  double switch_threshold = 0.01;
  Index grid_cells = 201;
  std::vector<double> slices = {0.5, 1.0, 2.0, 4.0, 8.0};
  Index warmup = 40;
  int starts = 8;
  std::uint64_t seed = 0;
  bool relax_mu_beta = false;
  bool normalize_mixture = false;

  // Throws with the offending key and its valid range.
  void validate() const;
  HarnessConfig harness() const;
  nlohmann::json to_json() const;
  // Unknown keys are rejected; missing keys keep their defaults.
  static RunConfig from_json(const nlohmann::json& j);
};

}  // namespace psychic

#endif  // PSYCHIC_CONFIG_HPP_
