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

#include "psychic/reachability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "psychic/error.hpp"
#include "psychic/stats.hpp"

namespace psychic {

Index AxisSpec::nearest(double x) const {
  const double f = (x - min) / spacing();
  return std::clamp<Index>(static_cast<Index>(std::llround(f)), 0, cells - 1);
}

Index GridSpec::voxels() const {
  Index v = 1;
  for (const AxisSpec& a : axes) v *= a.cells;
  return v;
}

void GridSpec::validate() const {
  if (axes.empty()) throw Error("grid spec: need at least one axis");
  for (std::size_t d = 0; d < axes.size(); ++d) {
    const AxisSpec& a = axes[d];
    if (!(a.min < a.max)) throw Error("grid spec: axis " + std::to_string(d) + " needs min < max");
    if (a.cells < 2) throw Error("grid spec: axis " + std::to_string(d) + " needs >= 2 cells");
  }
  if (slices.empty()) throw Error("grid spec: need at least one slice time");
  if (!(horizon > 0.0)) throw Error("grid spec: horizon must be positive");
  for (double t : slices) {
    if (!(t > 0.0 && t <= horizon)) throw Error("grid spec: slice time " + std::to_string(t) + " outside (0, horizon]");
  }
}

GridSpec default_grid_spec(const ReachParams& params, const Eigen::VectorXd& x_s, std::vector<double> slices,
                           Index cells) {
  if (params.empty()) throw Error("default_grid_spec: no goals");
  if (slices.empty()) throw Error("default_grid_spec: no slice times");
  const Index dims = x_s.size();
  const double t_max = *std::max_element(slices.begin(), slices.end());
  Index per_axis = cells;
  while (per_axis > 3) {
    double total = 1.0;
    for (Index d = 0; d < dims; ++d) total *= static_cast<double>(per_axis);
    if (total <= static_cast<double>(kMaxDefaultVoxels)) break;
    per_axis -= 2;
  }
  GridSpec spec;
  spec.slices = std::move(slices);
  spec.horizon = std::max(60.0, t_max);
  for (Index d = 0; d < dims; ++d) {
    double half = 0.0;
    for (const auto& goal : params) {
      if (static_cast<Index>(goal.size()) != dims) throw Error("default_grid_spec: params/dimension mismatch");
      half = std::max(half, map_envelope(goal[static_cast<std::size_t>(d)], t_max));
    }
    if (!(half > 0.0)) half = 1.0;
    spec.axes.push_back({x_s(d) - half, x_s(d) + half, per_axis});
  }
  return spec;
}

Index ReachabilityGrid::flat_index(const std::vector<Index>& idx) const {
  Index flat = 0;
  for (std::size_t d = 0; d < spec.axes.size(); ++d) flat = flat * spec.axes[d].cells + idx[d];
  return flat;
}

std::vector<Index> ReachabilityGrid::unravel(Index flat) const {
  std::vector<Index> idx(spec.axes.size());
  for (std::size_t d = spec.axes.size(); d-- > 0;) {
    idx[d] = flat % spec.axes[d].cells;
    flat /= spec.axes[d].cells;
  }
  return idx;
}

Index ReachabilityGrid::slice_index(double t) const {
  for (std::size_t s = 0; s < spec.slices.size(); ++s) {
    if (std::abs(spec.slices[s] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return static_cast<Index>(s);
  }
  return -1;
}

namespace {

// Adds per-axis 1-D values into the flat grid: out[v] += sum_d axis_vals[d][idx_d].
Eigen::ArrayXd outer_sum(const std::vector<Eigen::ArrayXd>& axis_vals) {
  Eigen::ArrayXd out = axis_vals[0];
  for (std::size_t d = 1; d < axis_vals.size(); ++d) {
    const Index inner = axis_vals[d].size();
    Eigen::ArrayXd next(out.size() * inner);
    for (Index o = 0; o < out.size(); ++o) next.segment(o * inner, inner) = out(o) + axis_vals[d];
    out = std::move(next);
  }
  return out;
}

}  // namespace

ReachabilityGrid reach_grid(const ReachParams& params, const Eigen::VectorXd& x_s, const GridSpec& spec,
                            const ReachOptions& options) {
  spec.validate();
  const Index dims = spec.dims();
  const Index goals = static_cast<Index>(params.size());
  if (goals < 1) throw Error("reach_grid: need at least one goal");
  if (x_s.size() != dims) throw Error("reach_grid: x_s dimension does not match the grid");
  for (Index d = 0; d < dims; ++d) {
    const AxisSpec& a = spec.axes[static_cast<std::size_t>(d)];
    if (!(x_s(d) >= a.min && x_s(d) <= a.max)) throw Error("reach_grid: grid excludes x_s along axis " + std::to_string(d));
  }
  for (const auto& goal : params) {
    if (static_cast<Index>(goal.size()) != dims) throw Error("reach_grid: params/dimension mismatch");
  }
  Eigen::ArrayXd log_w(goals);
  if (!options.weights.empty()) {
    if (static_cast<Index>(options.weights.size()) != goals) throw Error("reach_grid: weight count does not match goals");
    for (Index k = 0; k < goals; ++k) log_w(k) = std::log(options.weights[static_cast<std::size_t>(k)]);
  } else {
    log_w.setConstant(options.normalize ? -std::log(static_cast<double>(goals)) : 0.0);
  }

  ReachabilityGrid grid;
  grid.spec = spec;
  grid.x_s = x_s;
  if (options.per_goal) grid.per_goal.assign(static_cast<std::size_t>(goals), {});
  for (double t : spec.slices) {
    // logpdf[k][d] over the axis points of dimension d.
    std::vector<std::vector<Eigen::ArrayXd>> per(static_cast<std::size_t>(goals));
    for (Index k = 0; k < goals; ++k) {
      for (Index d = 0; d < dims; ++d) {
        const AxisSpec& a = spec.axes[static_cast<std::size_t>(d)];
        const TransitionDensity<double> density(params[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)], t);
        Eigen::ArrayXd v(a.cells);
        for (Index i = 0; i < a.cells; ++i) v(i) = density.log_pdf(a.point(i) - x_s(d));
        per[static_cast<std::size_t>(k)].push_back(std::move(v));
      }
    }
    std::vector<Eigen::ArrayXd> mixed;
    for (Index d = 0; d < dims; ++d) {
      const Index cells = spec.axes[static_cast<std::size_t>(d)].cells;
      Eigen::ArrayXd m(cells);
      Eigen::ArrayXd terms(goals);
      for (Index i = 0; i < cells; ++i) {
        for (Index k = 0; k < goals; ++k) terms(k) = log_w(k) + per[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)](i);
        m(i) = stats::log_sum_exp(terms);
      }
      mixed.push_back(std::move(m));
    }
    grid.slices.push_back(outer_sum(mixed));
    if (options.per_goal) {
      for (Index k = 0; k < goals; ++k) {
        grid.per_goal[static_cast<std::size_t>(k)].push_back(outer_sum(per[static_cast<std::size_t>(k)]));
      }
    }
  }
  grid.collapsed = collapse_time(grid);
  return grid;
}

Eigen::ArrayXd collapse_time(const ReachabilityGrid& grid) {
  if (grid.slices.empty()) throw Error("collapse_time: no slices");
  Eigen::ArrayXd out = grid.slices.front();
  for (std::size_t s = 1; s < grid.slices.size(); ++s) out = out.max(grid.slices[s]);
  return out;
}

SliceExport slice_export(const ReachabilityGrid& grid, double t, Index dim_a, Index dim_b) {
  const Index dims = grid.spec.dims();
  if (dims < 2) throw Error("slice_export: need >= 2 dims");
  if (dim_a < 0 || dim_b < 0 || dim_a >= dims || dim_b >= dims || dim_a == dim_b) {
    throw Error("slice_export: invalid plane dimensions");
  }
  const Index s = grid.slice_index(t);
  if (s < 0) throw Error("slice_export: time " + std::to_string(t) + " was not computed");
  const AxisSpec& a = grid.spec.axes[static_cast<std::size_t>(dim_a)];
  const AxisSpec& b = grid.spec.axes[static_cast<std::size_t>(dim_b)];
  SliceExport out;
  out.t = t;
  out.dim_a = dim_a;
  out.dim_b = dim_b;
  out.axis_a.resize(a.cells);
  out.axis_b.resize(b.cells);
  for (Index i = 0; i < a.cells; ++i) out.axis_a(i) = a.point(i);
  for (Index j = 0; j < b.cells; ++j) out.axis_b(j) = b.point(j);
  std::vector<Index> idx(static_cast<std::size_t>(dims));
  for (Index d = 0; d < dims; ++d) idx[static_cast<std::size_t>(d)] = grid.spec.axes[static_cast<std::size_t>(d)].nearest(grid.x_s(d));
  out.values.resize(a.cells, b.cells);
  const Eigen::ArrayXd& slice = grid.slices[static_cast<std::size_t>(s)];
  for (Index i = 0; i < a.cells; ++i) {
    for (Index j = 0; j < b.cells; ++j) {
      idx[static_cast<std::size_t>(dim_a)] = i;
      idx[static_cast<std::size_t>(dim_b)] = j;
      out.values(i, j) = slice(grid.flat_index(idx));
    }
  }
  return out;
}

}  // namespace psychic
