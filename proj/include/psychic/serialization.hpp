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

// CSV/JSON plumbing for the on-disk artifacts.

#ifndef PSYCHIC_SERIALIZATION_HPP_
#define PSYCHIC_SERIALIZATION_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace psychic {

std::vector<std::string> split_csv_line(std::string_view line);
bool parse_double(std::string_view text, double& out);
// Shortest representation that parses back to the same double.
std::string format_double(double v);

// FNV-1a over the bytes of s, printed as 16 hex digits.
std::string fnv1a_hex(std::string_view s);

// `# key=value ...` metadata line written at the top of CSV artifacts.
std::string metadata_comment(const nlohmann::json& config, std::uint64_t seed);

// Reads a CSV with a header into named columns; '#' lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // Column index by name, -1 when absent.
  int column(std::string_view name) const;
  std::vector<double> numeric_column(std::string_view name) const;
};
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace psychic

#endif  // PSYCHIC_SERIALIZATION_HPP_
