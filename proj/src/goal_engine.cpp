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

#include "psychic/goal_engine.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "psychic/error.hpp"
#include "psychic/km_estimator.hpp"
#include "psychic/stats.hpp"

namespace psychic {

void GoalEngineConfig::validate() const {
  if (window < 3 || window % 2 == 0) throw Error("goal engine: window must be odd and >= 3");
  if (!(direction_deadband >= 0.0)) throw Error("goal engine: direction deadband must be >= 0");
  if (!(contamination > 0.0 && contamination < 1.0)) throw Error("goal engine: contamination must be in (0, 1)");
  if (!(switch_threshold >= 0.0)) throw Error("goal engine: switch threshold must be >= 0");
}

namespace {

void check_window(Index window) {
  if (window < 3 || window % 2 == 0) throw Error("window must be odd and >= 3");
}

Index window_start(Index i, Index window) { return std::max<Index>(0, i - window + 1); }

Eigen::VectorXd trailing_mean(const Eigen::VectorXd& v, Index window) {
  Eigen::VectorXd prefix(v.size() + 1);
  prefix(0) = 0.0;
  for (Index i = 0; i < v.size(); ++i) prefix(i + 1) = prefix(i) + v(i);
  Eigen::VectorXd out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const Index lo = window_start(i, window);
    out(i) = (prefix(i + 1) - prefix(lo)) / static_cast<double>(i + 1 - lo);
  }
  return out;
}

}  // namespace

Eigen::VectorXd dispersion(const Eigen::VectorXd& m1, Index window) {
  check_window(window);
  Eigen::VectorXd r(m1.size());
  for (Index i = 0; i < m1.size(); ++i) {
    const Index lo = window_start(i, window);
    const auto seg = m1.segment(lo, i + 1 - lo);
    const double mean = seg.mean();
    const double var = (seg.array() - mean).square().mean();
    r(i) = mean / std::max(var, kDispersionVarFloor);
  }
  return r;
}

SettledScores settled_score(const Eigen::VectorXd& r, Index window) {
  check_window(window);
  if (!r.allFinite()) throw Error("settled_score: non-finite dispersion");
  SettledScores s{Eigen::VectorXd(r.size()), Eigen::VectorXd(r.size())};
  std::vector<double> buf;
  for (Index i = 0; i < r.size(); ++i) {
    const Index lo = window_start(i, window);
    buf.assign(r.data() + lo, r.data() + i + 1);
    const double med = stats::median(buf);
    const double spread = std::max(stats::mad(buf), kMadFloor);
    const double settled = 0.5 * (1.0 + std::erf((med - r(i)) / (std::sqrt(2.0) * spread)));
    s.settled(i) = settled;
    s.move(i) = 1.0 - settled;
  }
  return s;
}

Eigen::VectorXd ecod_scores(const Eigen::MatrixXd& features) {
  const Index n = features.rows();
  if (n < 20) throw Error("ecod: need at least 20 steps, got " + std::to_string(n));
  if (!features.allFinite()) throw Error("ecod: non-finite feature");
  Eigen::VectorXd left = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd right = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd automatic = Eigen::VectorXd::Zero(n);
  const double dn = static_cast<double>(n);
  std::vector<double> sorted(static_cast<std::size_t>(n));
  for (Index j = 0; j < features.cols(); ++j) {
    const Eigen::VectorXd col = features.col(j);
    std::copy(col.data(), col.data() + n, sorted.begin());
    std::sort(sorted.begin(), sorted.end());
    const bool left_skewed = stats::skewness(col) < 0.0;
    for (Index i = 0; i < n; ++i) {
      const double v = col(i);
      const double below = static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
      const double above = dn - static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
      const double tail_left = -std::log(below / dn);
      const double tail_right = -std::log(above / dn);
      left(i) += tail_left;
      right(i) += tail_right;
      automatic(i) += left_skewed ? tail_left : tail_right;
    }
  }
  return left.cwiseMax(right).cwiseMax(automatic);
}

Eigen::VectorXi ecod_jump_outliers(const Eigen::MatrixXd& features, double contamination) {
  if (!(contamination > 0.0 && contamination < 1.0)) throw Error("ecod: contamination must be in (0, 1)");
  const Eigen::VectorXd scores = ecod_scores(features);
  const std::vector<double> values(scores.data(), scores.data() + scores.size());
  const double threshold = stats::quantile(values, 1.0 - contamination);
  return (scores.array() > threshold).cast<int>().matrix();
}

Eigen::MatrixXd jump_features(const KMSeries& raw, Index window) {
  check_window(window);
  const double dt = raw.dt;
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(raw.size(), 2);
  std::vector<double> buf;
  for (Index i = 0; i < raw.size(); ++i) {
    const Index lo = window_start(i, window);
    buf.assign(raw.m2.data() + lo, raw.m2.data() + i + 1);
    const double m2 = stats::median(buf);
    const double e4 = raw.m4(i) - 3.0 * dt * m2 * m2;
    const double e6 = raw.m6(i) - 15.0 * dt * dt * m2 * m2 * m2;
    if (e4 > kNoJumpM4Floor && e6 > 0.0) {
      const double sigma_beta_sq = e6 / (5.0 * e4);
      f(i, 0) = e4 / (3.0 * sigma_beta_sq * sigma_beta_sq);
      f(i, 1) = sigma_beta_sq;
    }
  }
  return f;
}

Index GoalScores::jump_count() const {
  if (jump.size() == 0) return 0;
  return (jump.rowwise().maxCoeff().array() > 0).count();
}

GoalScores compute_scores(const Trajectory& traj, const GoalEngineConfig& config) {
  config.validate();
  const Index steps = traj.size() - 1;
  const Index dims = traj.dims();
  GoalScores s;
  s.r.resize(steps, dims);
  s.settled.resize(steps, dims);
  s.move.resize(steps, dims);
  s.jump.resize(steps, dims);
  s.direction.resize(steps, dims);
  s.sigma_beta.resize(steps, dims);
  for (Index d = 0; d < dims; ++d) {
    const KMSeries raw = raw_moments(increments(traj, d));
    s.r.col(d) = dispersion(raw.m1, config.window);
    const SettledScores ss = settled_score(s.r.col(d), config.window);
    s.settled.col(d) = ss.settled;
    s.move.col(d) = ss.move;
    s.jump.col(d) = ecod_jump_outliers(jump_features(raw, config.window), config.contamination);

    const Eigen::VectorXd m1 = trailing_mean(raw.m1, config.window);
    const Eigen::VectorXd m2 = trailing_mean(raw.m2, config.window);
    const Eigen::VectorXd m4 = trailing_mean(raw.m4, config.window);
    const Eigen::VectorXd m6 = trailing_mean(raw.m6, config.window);
    for (Index i = 0; i < steps; ++i) {
      s.direction(i, d) = std::abs(m1(i)) < config.direction_deadband ? 0 : (m1(i) > 0.0 ? 1 : -1);
      const KmParams p = km_params_from_moments(m1(i), m2(i), m4(i), m6(i), raw.dt, JumpMoments::cumulant);
      s.sigma_beta(i, d) = std::sqrt(p.sigma_beta_sq);
    }
  }
  return s;
}

StepScores step_scores(const GoalScores& scores, Index step) {
  return StepScores{scores.settled.row(step).transpose(), scores.move.row(step).transpose(),
                    scores.jump.row(step).transpose().cast<double>(),
                    scores.direction.row(step).transpose().cast<double>(), scores.sigma_beta.row(step).transpose()};
}

Eigen::VectorXd goal_weights(const Eigen::VectorXd& g, const GoalSet& goals, double temperature) {
  const Index k = goals.size();
  Eigen::VectorXd logits(k);
  for (Index j = 0; j < k; ++j) logits(j) = -(g - goals[j].position).norm() / temperature;
  if (k == 0) return logits;
  const Eigen::ArrayXd w = (logits.array() - logits.maxCoeff()).exp();
  return (w / w.sum()).matrix();
}

Eigen::MatrixXd goal_dynamics_terms(const Eigen::VectorXd& g, const Eigen::VectorXd& x, const StepScores& s,
                                    const GoalSet& goals, double temperature) {
  const Index dims = g.size();
  const Index k = goals.size();
  Eigen::MatrixXd t(dims, 3 + k);
  t.col(0) = s.settled.cwiseProduct(x - g);
  t.col(1) = s.move.cwiseProduct(s.direction);
  t.col(2) = s.jump.cwiseProduct(s.sigma_beta).cwiseProduct(s.direction);
  if (k > 0) {
    const Eigen::VectorXd w = goal_weights(g, goals, temperature);
    for (Index j = 0; j < k; ++j) t.col(3 + j) = w(j) * s.move.cwiseProduct(goals[j].position - g);
  }
  return t;
}

GoalStep goal_dynamics_step(const Eigen::VectorXd& g, const Eigen::VectorXd& x, const StepScores& s,
                            const GoalSet& goals, const Eigen::VectorXd& xi, double dt, double temperature) {
  if (xi.size() != 3 + goals.size()) {
    throw Error("goal_dynamics_step: xi has " + std::to_string(xi.size()) + " entries, expected " +
                std::to_string(3 + goals.size()));
  }
  GoalStep out;
  out.g_dot = goal_dynamics_terms(g, x, s, goals, temperature) * xi;
  out.g_next = g + out.g_dot * dt;
  return out;
}

std::string to_string(GoalMode mode) {
  switch (mode) {
    case GoalMode::nn:
      return "nn";
    case GoalMode::det:
      return "det";
    case GoalMode::disc:
      return "disc";
  }
  return "nn";
}

GoalMode parse_goal_mode(const std::string& s) {
  if (s == "nn" || s == "NN") return GoalMode::nn;
  if (s == "det") return GoalMode::det;
  if (s == "disc") return GoalMode::disc;
  throw Error("unknown goal mode '" + s + "' (expected nn, det or disc)");
}

namespace {

double resolve_temperature(const GoalEngineConfig& config, const GoalSet& goals) {
  return config.temperature > 0.0 ? config.temperature : goals.mean_pairwise_distance();
}

Eigen::VectorXd resolve_xi(const GoalEngineConfig& config, const GoalSet& goals) {
  const Index expected = 3 + goals.size();
  if (config.xi.empty()) return Eigen::VectorXd::Ones(expected);
  if (static_cast<Index>(config.xi.size()) != expected) {
    throw Error("goal engine: xi has " + std::to_string(config.xi.size()) + " entries, expected " +
                std::to_string(expected));
  }
  return Eigen::Map<const Eigen::VectorXd>(config.xi.data(), expected);
}

}  // namespace

GoalTrace infer_goal_trace(const Trajectory& traj, const GoalSet& goals, GoalMode mode,
                           const GoalEngineConfig& config) {
  config.validate();
  if (mode != GoalMode::disc && goals.empty()) {
    throw Error("infer_goal_trace: " + to_string(mode) + " mode needs at least one known goal");
  }
  if (!goals.empty() && goals.dims() != traj.dims()) throw Error("infer_goal_trace: goal/trajectory dimension mismatch");

  const Index n = traj.size();
  GoalTrace trace;
  trace.mode = mode;
  trace.scores = compute_scores(traj, config);
  trace.g.resize(n, traj.dims());

  if (mode == GoalMode::nn) {
    for (Index i = 0; i < n; ++i) trace.g.row(i) = goals[goals.nearest(traj.position(i))].position.transpose();
  } else {
    const double temperature = resolve_temperature(config, goals);
    const Eigen::VectorXd xi = resolve_xi(config, goals);
    trace.raw.resize(n, traj.dims());
    trace.raw.row(0) = traj.positions().row(0);
    for (Index i = 0; i + 1 < n; ++i) {
      const GoalStep st = goal_dynamics_step(trace.raw.row(i).transpose(), traj.position(i + 1),
                                             step_scores(trace.scores, i), goals, xi, traj.dt(), temperature);
      trace.raw.row(i + 1) = st.g_next.transpose();
    }
    if (mode == GoalMode::det) {
      for (Index i = 0; i < n; ++i) {
        trace.g.row(i) = goals[goals.nearest(trace.raw.row(i).transpose())].position.transpose();
      }
    } else {
      trace.g = trace.raw;
    }
  }

  trace.labels.assign(static_cast<std::size_t>(n), -1);
  if (!goals.empty()) {
    for (Index i = 0; i < n; ++i) {
      trace.labels[static_cast<std::size_t>(i)] = static_cast<int>(goals.nearest(trace.g.row(i).transpose()));
    }
  }
  for (Index i = 1; i < n; ++i) {
    const bool changed = mode == GoalMode::disc
                             ? (trace.g.row(i) - trace.g.row(i - 1)).norm() > config.switch_threshold
                             : trace.labels[static_cast<std::size_t>(i)] != trace.labels[static_cast<std::size_t>(i - 1)];
    if (changed) trace.switches.push_back({i, trace.g.row(i - 1).transpose(), trace.g.row(i).transpose()});
  }
  return trace;
}

SindyModel sindy_goal_fit(const Trajectory& traj, const GoalTrace& trace, const GoalSet& goals,
                          const GoalEngineConfig& config, const SsrOptions& ssr) {
  const Eigen::MatrixXd& g = trace.raw.size() > 0 ? trace.raw : trace.g;
  const Index n = g.rows();
  const Index dims = g.cols();
  const Index terms = 3 + goals.size();
  if (n != traj.size()) throw Error("sindy_goal_fit: trace and trajectory lengths differ");
  if (n - 1 < 2 * terms) throw Error("sindy_goal_fit: trace too short for " + std::to_string(terms) + " terms");
  const double temperature = resolve_temperature(config, goals);

  Eigen::MatrixXd design((n - 1) * dims, terms);
  Eigen::VectorXd target((n - 1) * dims);
  for (Index i = 0; i + 1 < n; ++i) {
    const Eigen::MatrixXd t = goal_dynamics_terms(g.row(i).transpose(), traj.position(i + 1),
                                                  step_scores(trace.scores, i), goals, temperature);
    design.middleRows(i * dims, dims) = t;
    target.segment(i * dims, dims) = (g.row(i + 1) - g.row(i)).transpose() / traj.dt();
  }
  std::vector<std::string> names = {"settled", "move", "jump"};
  for (Index k = 0; k < goals.size(); ++k) names.push_back("goal:" + goals[k].label);
  SsrOptions opts = ssr;
  opts.drop_dependent = true;
  return ssr_fit(design, names, target, opts, "goal-dynamics");
}

}  // namespace psychic
