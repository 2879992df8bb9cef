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

#ifndef PSYCHIC_ERROR_HPP_
#define PSYCHIC_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace psychic {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; line is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A design matrix whose columns are linearly dependent.
class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& what, std::vector<std::string> columns)
      : Error(what), columns_(std::move(columns)) {}
  const std::vector<std::string>& dependent_columns() const { return columns_; }

 private:
  std::vector<std::string> columns_;
};

}  // namespace psychic

#endif  // PSYCHIC_ERROR_HPP_
