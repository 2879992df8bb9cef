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

#include "psychic/reachability.hpp"

using namespace psychic;

namespace {

GridSpec spec_1d(double lo, double hi, Index cells, std::vector<double> slices = {0.5, 1.0, 2.0, 4.0, 8.0}) {
  GridSpec s;
  s.axes = {{lo, hi, cells}};
  s.slices = std::move(slices);
  return s;
}

// Full width at half maximum by linear interpolation between grid points.
double half_max_width(const Eigen::ArrayXd& logp, const AxisSpec& axis) {
  Index peak = 0;
  logp.maxCoeff(&peak);
  const double level = logp(peak) - std::log(2.0);
  const auto cross = [&](Index step) {
    Index i = peak;
    while (logp(i + step) > level) i += step;
    const double f = (logp(i) - level) / (logp(i) - logp(i + step));
    return axis.point(i) + static_cast<double>(step) * f * axis.spacing();
  };
  return cross(1) - cross(-1);
}

}  // namespace

TEST_SUITE("reachability") {

TEST_CASE("a single drifting goal peaks at the mean") {
  const ReachParams p = {{{0.3, 0.2, 0.0, 0.0, 0.0}}};
  const Eigen::VectorXd xs = Eigen::VectorXd::Constant(1, 0.1);
  const GridSpec spec = default_grid_spec(p, xs);
  const ReachabilityGrid g = reach_grid(p, xs, spec);
  REQUIRE(g.slices.size() == 5);
  for (std::size_t s = 0; s < 5; ++s) {
    Index arg = 0;
    g.slices[s].maxCoeff(&arg);
    CHECK(std::abs(spec.axes[0].point(arg) - (0.1 + 0.3 * spec.slices[s])) <= spec.axes[0].spacing());
  }
}

TEST_CASE("opposite goals give a mirror-symmetric field") {
  const ReachParams p = {{{0.3, 0.1, 0.5, 0.05, 0.08}}, {{-0.3, 0.1, 0.5, -0.05, 0.08}}};
  const ReachabilityGrid g = reach_grid(p, Eigen::VectorXd::Zero(1), spec_1d(-4.0, 4.0, 401));
  for (const Eigen::ArrayXd& s : g.slices) CHECK((s - s.reverse()).abs().maxCoeff() <= 1e-9);
}

TEST_CASE("diffusive spread grows with the square root of time") {
  const ReachParams p = {{{0.0, 0.2, 0.0, 0.0, 0.0}}};
  const Eigen::VectorXd xs = Eigen::VectorXd::Zero(1);
  const GridSpec spec = default_grid_spec(p, xs);
  const ReachabilityGrid g = reach_grid(p, xs, spec);
  const double base = half_max_width(g.slices[0], spec.axes[0]) / std::sqrt(0.5);
  for (std::size_t s = 1; s < 5; ++s) {
    const double w = half_max_width(g.slices[s], spec.axes[0]);
    CHECK(w / std::sqrt(spec.slices[s]) == doctest::Approx(base).epsilon(0.1));
  }
}

TEST_CASE("time collapse") {
  const ReachParams p = {{{0.2, 0.1, 1.0, 0.1, 0.05}}};
  const Eigen::VectorXd xs = Eigen::VectorXd::Zero(1);
  SUBCASE("dominates every slice") {
    const ReachabilityGrid g = reach_grid(p, xs, spec_1d(-5, 5, 301));
    for (const Eigen::ArrayXd& s : g.slices) CHECK((g.collapsed >= s).all());
    CHECK((collapse_time(g) == g.collapsed).all());
  }
  SUBCASE("one slice is its own collapse") {
    const ReachabilityGrid g = reach_grid(p, xs, spec_1d(-5, 5, 101, {2.0}));
    CHECK((g.collapsed == g.slices[0]).all());
  }
  SUBCASE("a uniformly larger slice wins") {
    ReachabilityGrid g = reach_grid(p, xs, spec_1d(-5, 5, 101, {1.0, 2.0}));
    g.slices[1] = g.slices[0] + 1.0;
    CHECK((collapse_time(g) == g.slices[1]).all());
  }
  SUBCASE("slice order does not matter") {
    const ReachabilityGrid a = reach_grid(p, xs, spec_1d(-5, 5, 101, {0.5, 4.0, 1.0}));
    const ReachabilityGrid b = reach_grid(p, xs, spec_1d(-5, 5, 101, {4.0, 1.0, 0.5}));
    CHECK((a.collapsed == b.collapsed).all());
  }
}

TEST_CASE("dimensions multiply") {
  const std::vector<JumpDiffusionParams> dims = {{0.1, 0.2, 0.0, 0.0, 0.0}, {-0.2, 0.1, 2.0, 0.05, 0.1}};
  const Eigen::Vector2d xs(0.3, -0.1);
  GridSpec spec;
  spec.axes = {{-2.0, 2.5, 41}, {-3.0, 2.0, 31}};
  spec.slices = {0.5, 2.0};
  const ReachabilityGrid joint = reach_grid({dims}, xs, spec);
  const ReachabilityGrid gx = reach_grid({{dims[0]}}, xs.head(1), spec_1d(-2.0, 2.5, 41, {0.5, 2.0}));
  const ReachabilityGrid gy = reach_grid({{dims[1]}}, xs.tail(1), spec_1d(-3.0, 2.0, 31, {0.5, 2.0}));
  for (std::size_t s = 0; s < 2; ++s) {
    for (Index i = 0; i < 41; ++i) {
      for (Index j = 0; j < 31; ++j) {
        CHECK(joint.slices[s](joint.flat_index({i, j})) == doctest::Approx(gx.slices[s](i) + gy.slices[s](j)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("single-goal slices hold unit mass") {
  const ReachParams p = {{{0.1, 0.2, 0.0, 0.0, 0.0}, {0.0, 0.15, 1.0, 0.05, 0.1}}};
  const Eigen::Vector2d xs(0.0, 0.0);
  const GridSpec spec = default_grid_spec(p, xs, {0.5, 1.0, 2.0, 4.0, 8.0}, 151);
  const ReachabilityGrid g = reach_grid(p, xs, spec);
  const double volume = spec.axes[0].spacing() * spec.axes[1].spacing();
  for (const Eigen::ArrayXd& s : g.slices) CHECK(s.exp().sum() * volume == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("goal weights and normalization") {
  const JumpDiffusionParams a{0.2, 0.1, 0, 0, 0}, b{-0.2, 0.1, 0, 0, 0};
  const Eigen::VectorXd xs = Eigen::VectorXd::Zero(1);
  const GridSpec spec = spec_1d(-3, 3, 61, {1.0});
  ReachOptions per_goal;
  per_goal.per_goal = true;
  const ReachabilityGrid g = reach_grid({{a}, {b}}, xs, spec, per_goal);
  REQUIRE(g.per_goal.size() == 2);
  const Eigen::ArrayXd sum = (g.per_goal[0][0].exp() + g.per_goal[1][0].exp()).log();
  CHECK((g.slices[0] - sum).abs().maxCoeff() < 1e-12);
  ReachOptions norm;
  norm.normalize = true;
  CHECK((reach_grid({{a}, {b}}, xs, spec, norm).slices[0] - (g.slices[0] - std::log(2.0))).abs().maxCoeff() < 1e-12);
  ReachOptions bad;
  bad.weights = {1.0};
  CHECK_THROWS(reach_grid({{a}, {b}}, xs, spec, bad));
}

TEST_CASE("slice export") {
  const std::vector<JumpDiffusionParams> dims = {{0.1, 0.2, 0, 0, 0}, {0.0, 0.1, 0, 0, 0}, {-0.1, 0.3, 0, 0, 0}};
  const Eigen::Vector3d xs(0.0, 0.2, -0.1);
  GridSpec spec;
  spec.axes = {{-2, 2, 21}, {-1, 1, 11}, {-3, 3, 15}};
  spec.slices = {1.0, 2.0};
  const ReachabilityGrid g = reach_grid({dims}, xs, spec);
  const SliceExport xz = slice_export(g, 2.0, 0, 2);
  CHECK(xz.values.rows() == 21);
  CHECK(xz.values.cols() == 15);
  const Index jy = spec.axes[1].nearest(0.2);
  for (Index i = 0; i < 21; ++i) {
    for (Index k = 0; k < 15; ++k) {
      // Centre voxel of a 3x3x3 grid around the same point.
      const double direct = reach_grid({dims}, xs, [&] {
        // Half-widths wide enough that each axis still spans x_s.
        const auto around = [&](Index axis, Index cell) {
          const double c = spec.axes[static_cast<std::size_t>(axis)].point(cell);
          const double half = std::abs(c - xs(axis)) + 1.0;
          return AxisSpec{c - half, c + half, 3};
        };
        GridSpec one;
        one.axes = {around(0, i), around(1, jy), around(2, k)};
        one.slices = {2.0};
        return one;
      }()).slices[0](13);
      CHECK(std::abs(xz.values(i, k) - direct) <= 1e-12);
      CHECK(xz.values(i, k) == g.slices[1](g.flat_index({i, jy, k})));
    }
  }
  CHECK_THROWS_WITH(slice_export(g, 3.0, 0, 1), doctest::Contains("time"));
  const ReachabilityGrid one = reach_grid({{dims[0]}}, xs.head(1), spec_1d(-2, 2, 21, {1.0}));
  CHECK_THROWS_WITH(slice_export(one, 1.0, 0, 1), doctest::Contains("need >= 2 dims"));
}

TEST_CASE("grid validation") {
  const ReachParams p = {{{0.1, 0.2, 0, 0, 0}}};
  CHECK_THROWS_WITH(reach_grid(p, Eigen::VectorXd::Constant(1, 5.0), spec_1d(-1, 1, 11)), doctest::Contains("excludes x_s"));
  CHECK_THROWS(reach_grid(p, Eigen::VectorXd::Zero(1), spec_1d(1, -1, 11)));
  CHECK_THROWS(reach_grid(p, Eigen::VectorXd::Zero(1), spec_1d(-1, 1, 11, {0.0})));
  CHECK_THROWS(reach_grid(ReachParams{}, Eigen::VectorXd::Zero(1), spec_1d(-1, 1, 11)));
  const GridSpec big = default_grid_spec({{{0, 1, 0, 0, 0}, {0, 1, 0, 0, 0}, {0, 1, 0, 0, 0}}}, Eigen::Vector3d::Zero());
  CHECK(big.voxels() <= kMaxDefaultVoxels);
  for (const AxisSpec& a : big.axes) CHECK(a.cells % 2 == 1);
}

}  // TEST_SUITE
