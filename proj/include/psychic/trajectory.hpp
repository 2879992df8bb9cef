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

// Observable types: sampled trajectories, goal sets, and increments.
//
// Units are meters and seconds throughout. Each spatial dimension is treated
// as an independent process by the estimators; the joint storage here only
// serves I/O and metrics.

#ifndef PSYCHIC_TRAJECTORY_HPP_
#define PSYCHIC_TRAJECTORY_HPP_

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace psychic {

using Eigen::Index;

class Trajectory {
 public:
  // Validates: >= 2 samples, >= 1 dim, finite values, strictly increasing times.
  Trajectory(Eigen::VectorXd times, Eigen::MatrixXd positions, double dt);

  const Eigen::VectorXd& times() const { return times_; }
  // rows = samples, cols = dims
  const Eigen::MatrixXd& positions() const { return positions_; }
  double dt() const { return dt_; }
  Index dims() const { return positions_.cols(); }
  Index size() const { return positions_.rows(); }
  double duration() const { return times_(size() - 1) - times_(0); }

  Eigen::VectorXd position(Index i) const { return positions_.row(i).transpose(); }
  Eigen::VectorXd coordinate(Index dim) const { return positions_.col(dim); }

  // True when every step is within 1e-6 * dt of dt.
  bool is_uniform() const;

  // Samples [0, count) as a new trajectory; count >= 2.
  Trajectory prefix(Index count) const;

 private:
  Eigen::VectorXd times_;
  Eigen::MatrixXd positions_;
  double dt_;
};

struct Goal {
  std::string label;
  Eigen::VectorXd position;
};

class GoalSet {
 public:
  GoalSet() = default;
  // Goals must share one dimension and be pairwise distinct.
  explicit GoalSet(std::vector<Goal> goals);

  Index size() const { return static_cast<Index>(goals_.size()); }
  bool empty() const { return goals_.empty(); }
  // 0 for an empty set.
  Index dims() const;
  const Goal& operator[](Index k) const { return goals_[static_cast<std::size_t>(k)]; }
  const std::vector<Goal>& goals() const { return goals_; }

  // Index of the goal closest to x (Euclidean); ties go to the lower index.
  Index nearest(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  // Mean pairwise Euclidean distance; 1 m when fewer than two goals.
  double mean_pairwise_distance() const;

 private:
  std::vector<Goal> goals_;
};

struct IncrementSeries {
  Index dim = 0;
  Eigen::VectorXd values;  // x[i+1] - x[i]
  double dt = 0.0;
  Index size() const { return values.size(); }
};

// Parses `t,x[,y[,z]]` CSV. dt is the median time step. When
// resample_gaps is set, any step larger than 1.5 dt triggers linear
// resampling onto the uniform dt grid.
Trajectory load_trajectory(std::istream& in, bool resample_gaps = true);
Trajectory load_trajectory_file(const std::string& path, bool resample_gaps = true);
// Writes with full round-trip precision.
void write_trajectory(std::ostream& out, const Trajectory& traj);
void write_trajectory_file(const std::string& path, const Trajectory& traj);

// Linear interpolation onto t0, t0 + dt, ... <= t_last.
Trajectory resample_uniform(const Trajectory& traj, double dt);

IncrementSeries increments(const Trajectory& traj, Index dim);

GoalSet load_goals(std::istream& in);
GoalSet load_goals_file(const std::string& path);
void write_goals(std::ostream& out, const GoalSet& goals);

}  // namespace psychic

#endif  // PSYCHIC_TRAJECTORY_HPP_
