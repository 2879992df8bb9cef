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

// Probabilistic reachability over a state x time grid:
//
//   value_t(X) = log prod_n sum_k w_k p_n(X_n | x_s,n, g_k, tau = t)
//   collapsed(X) = max_t value_t(X)

#ifndef PSYCHIC_REACHABILITY_HPP_
#define PSYCHIC_REACHABILITY_HPP_

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "psychic/mixture_pdf.hpp"

namespace psychic {

struct AxisSpec {
  double min = 0.0;
  double max = 0.0;
  Index cells = 0;

  double spacing() const { return (max - min) / static_cast<double>(cells - 1); }
  double point(Index i) const { return min + spacing() * static_cast<double>(i); }
  // Index of the closest grid point.
  Index nearest(double x) const;
};

struct GridSpec {
  std::vector<AxisSpec> axes;
  std::vector<double> slices = {0.5, 1.0, 2.0, 4.0, 8.0};
  double horizon = 60.0;

  Index dims() const { return static_cast<Index>(axes.size()); }
  Index voxels() const;
  void validate() const;
};

// Largest total voxel count default_grid_spec will produce.
inline constexpr Index kMaxDefaultVoxels = 2'000'000;

// params[k][n] describes goal k along dimension n.
using ReachParams = std::vector<std::vector<JumpDiffusionParams>>;

// Per dimension, x_s +- the widest MAP envelope over goals at the longest
// slice. Cells default to 201 per axis, reduced (kept odd) when the product
// would exceed kMaxDefaultVoxels.
GridSpec default_grid_spec(const ReachParams& params, const Eigen::VectorXd& x_s,
                           std::vector<double> slices = {0.5, 1.0, 2.0, 4.0, 8.0},
                           Index cells = kDefaultGridCells);

struct ReachOptions {
  // Goal weights inside the sum; empty means 1 each (or 1/K when normalized).
  std::vector<double> weights;
  bool normalize = false;
  bool per_goal = false;
};

struct ReachabilityGrid {
  GridSpec spec;
  Eigen::VectorXd x_s;
  // One flat array per slice; the last dimension varies fastest.
  std::vector<Eigen::ArrayXd> slices;
  // per_goal[k][s], filled when requested.
  std::vector<std::vector<Eigen::ArrayXd>> per_goal;
  Eigen::ArrayXd collapsed;

  Index flat_index(const std::vector<Index>& idx) const;
  std::vector<Index> unravel(Index flat) const;
  // Index of the slice at time t, or -1.
  Index slice_index(double t) const;
};

ReachabilityGrid reach_grid(const ReachParams& params, const Eigen::VectorXd& x_s, const GridSpec& spec,
                            const ReachOptions& options = {});

// Voxelwise maximum over the slices.
Eigen::ArrayXd collapse_time(const ReachabilityGrid& grid);

struct SliceExport {
  double t = 0.0;
  Index dim_a = 0, dim_b = 1;
  Eigen::VectorXd axis_a, axis_b;
  Eigen::MatrixXd values;  // cells_a x cells_b, log-likelihood
};

// Plane through x_s's voxel in the remaining dimensions.
SliceExport slice_export(const ReachabilityGrid& grid, double t, Index dim_a, Index dim_b);

}  // namespace psychic

#endif  // PSYCHIC_REACHABILITY_HPP_
