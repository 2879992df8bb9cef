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

#include "psychic/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "psychic/error.hpp"
#include "psychic/serialization.hpp"
#include "psychic/stats.hpp"

namespace psychic {

Trajectory::Trajectory(Eigen::VectorXd times, Eigen::MatrixXd positions, double dt)
    : times_(std::move(times)), positions_(std::move(positions)), dt_(dt) {
  if (times_.size() != positions_.rows()) throw Error("trajectory: times/positions length mismatch");
  if (times_.size() < 2) throw Error("trajectory: need at least 2 samples");
  if (positions_.cols() < 1) throw Error("trajectory: need at least 1 dimension");
  if (!times_.allFinite() || !positions_.allFinite()) throw Error("trajectory: non-finite value");
  for (Index i = 1; i < times_.size(); ++i) {
    if (!(times_(i) > times_(i - 1))) throw Error("trajectory: non-monotonic time");
  }
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw Error("trajectory: dt must be positive");
}

bool Trajectory::is_uniform() const {
  for (Index i = 1; i < size(); ++i) {
    if (std::abs(times_(i) - times_(i - 1) - dt_) > 1e-6 * dt_) return false;
  }
  return true;
}

Trajectory Trajectory::prefix(Index count) const {
  if (count < 2 || count > size()) throw Error("trajectory: prefix length out of range");
  return Trajectory(times_.head(count), positions_.topRows(count), dt_);
}

GoalSet::GoalSet(std::vector<Goal> goals) : goals_(std::move(goals)) {
  if (goals_.empty()) return;
  const Index n = goals_.front().position.size();
  if (n < 1) throw Error("goal set: goals must have at least one coordinate");
  for (std::size_t i = 0; i < goals_.size(); ++i) {
    if (goals_[i].position.size() != n) throw Error("goal set: goals differ in dimension");
    if (!goals_[i].position.allFinite()) throw Error("goal set: non-finite goal coordinate");
    for (std::size_t j = 0; j < i; ++j) {
      if (goals_[i].position == goals_[j].position) {
        throw Error("goal set: duplicate goal '" + goals_[i].label + "'");
      }
    }
  }
}

Index GoalSet::dims() const { return goals_.empty() ? 0 : goals_.front().position.size(); }

Index GoalSet::nearest(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (goals_.empty()) throw Error("goal set: nearest goal of an empty set");
  Index best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < size(); ++k) {
    const double d = ((*this)[k].position - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

double GoalSet::mean_pairwise_distance() const {
  if (size() < 2) return 1.0;
  double sum = 0.0;
  int pairs = 0;
  for (Index i = 0; i < size(); ++i) {
    for (Index j = i + 1; j < size(); ++j) {
      sum += ((*this)[i].position - (*this)[j].position).norm();
      ++pairs;
    }
  }
  return sum / pairs;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Trajectory load_trajectory(std::istream& in, bool resample_gaps) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    header = split_csv_line(line);
    break;
  }
  static const char* kNames[] = {"t", "x", "y", "z"};
  if (header.size() < 2 || header.size() > 4) {
    throw ParseError("expected header t,x[,y[,z]]", line_no);
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (trim(header[c]) != kNames[c]) throw ParseError("expected header t,x[,y[,z]]", line_no);
  }
  const std::size_t dims = header.size() - 1;

  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("malformed row: expected " + std::to_string(header.size()) + " fields", line_no);
    }
    for (const auto& f : fields) {
      double v = 0.0;
      if (!parse_double(trim(f), v)) throw ParseError("malformed row: bad number '" + f + "'", line_no);
      values.push_back(v);
    }
  }
  const auto rows = static_cast<Index>(values.size() / header.size());
  if (rows < 2) throw ParseError("need at least 2 samples", 0);

  Eigen::VectorXd t(rows);
  Eigen::MatrixXd x(rows, static_cast<Index>(dims));
  for (Index r = 0; r < rows; ++r) {
    const std::size_t base = static_cast<std::size_t>(r) * header.size();
    t(r) = values[base];
    for (std::size_t d = 0; d < dims; ++d) x(r, static_cast<Index>(d)) = values[base + 1 + d];
  }
  for (Index r = 1; r < rows; ++r) {
    if (!(t(r) > t(r - 1))) throw ParseError("non-monotonic time", 0);
  }
  const Eigen::VectorXd steps = t.tail(rows - 1) - t.head(rows - 1);
  const double dt = stats::median(steps);
  Trajectory traj(std::move(t), std::move(x), dt);
  if (resample_gaps && steps.maxCoeff() > 1.5 * dt) return resample_uniform(traj, dt);
  return traj;
}

Trajectory load_trajectory_file(const std::string& path, bool resample_gaps) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trajectory file '" + path + "'");
  return load_trajectory(in, resample_gaps);
}

void write_trajectory(std::ostream& out, const Trajectory& traj) {
  static const char* kNames[] = {"x", "y", "z"};
  if (traj.dims() > 3) throw Error("trajectory CSV supports at most 3 dimensions");
  out << "t";
  for (Index d = 0; d < traj.dims(); ++d) out << ',' << kNames[d];
  out << '\n';
  for (Index i = 0; i < traj.size(); ++i) {
    out << format_double(traj.times()(i));
    for (Index d = 0; d < traj.dims(); ++d) out << ',' << format_double(traj.positions()(i, d));
    out << '\n';
  }
}

void write_trajectory_file(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_trajectory(out, traj);
}

Trajectory resample_uniform(const Trajectory& traj, double dt) {
  if (!(dt > 0.0)) throw Error("resample: dt must be positive");
  const double duration = traj.duration();
  if (dt > duration) throw Error("resample: dt larger than total duration");
  const auto count = static_cast<Index>(std::floor(duration / dt + 1e-9)) + 1;
  const Eigen::VectorXd& src_t = traj.times();
  const Eigen::MatrixXd& src_x = traj.positions();
  Eigen::VectorXd t(count);
  Eigen::MatrixXd x(count, traj.dims());
  Index seg = 0;
  for (Index i = 0; i < count; ++i) {
    const double ti = src_t(0) + static_cast<double>(i) * dt;
    t(i) = ti;
    while (seg + 2 < traj.size() && src_t(seg + 1) < ti) ++seg;
    const double t0 = src_t(seg);
    const double t1 = src_t(seg + 1);
    const double w = std::clamp((ti - t0) / (t1 - t0), 0.0, 1.0);
    if (w == 0.0) {
      x.row(i) = src_x.row(seg);
    } else if (w == 1.0) {
      x.row(i) = src_x.row(seg + 1);
    } else {
      x.row(i) = (1.0 - w) * src_x.row(seg) + w * src_x.row(seg + 1);
    }
  }
  return Trajectory(std::move(t), std::move(x), dt);
}

IncrementSeries increments(const Trajectory& traj, Index dim) {
  if (dim < 0 || dim >= traj.dims()) throw Error("increments: dimension index out of range");
  const Eigen::VectorXd x = traj.coordinate(dim);
  const Index n = x.size();
  return IncrementSeries{dim, x.tail(n - 1) - x.head(n - 1), traj.dt()};
}

GoalSet load_goals(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("goal JSON: ") + e.what(), 0);
  }
  if (!j.is_object() || !j.contains("goals") || !j["goals"].is_array()) {
    throw ParseError("goal JSON: expected {\"goals\": [...]}", 0);
  }
  std::vector<Goal> goals;
  for (const auto& g : j["goals"]) {
    Goal goal;
    goal.label = g.value("label", "g" + std::to_string(goals.size()));
    const auto& pos = g.at("pos");
    goal.position.resize(static_cast<Index>(pos.size()));
    for (std::size_t i = 0; i < pos.size(); ++i) goal.position(static_cast<Index>(i)) = pos[i].get<double>();
    goals.push_back(std::move(goal));
  }
  return GoalSet(std::move(goals));
}

GoalSet load_goals_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open goal file '" + path + "'");
  return load_goals(in);
}

void write_goals(std::ostream& out, const GoalSet& goals) {
  nlohmann::json j;
  j["goals"] = nlohmann::json::array();
  for (const auto& g : goals.goals()) {
    j["goals"].push_back({{"label", g.label},
                          {"pos", std::vector<double>(g.position.data(),
                                                      g.position.data() + g.position.size())}});
  }
  out << j.dump(2) << '\n';
}

}  // namespace psychic
