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

#include "psychic/mixture_pdf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "psychic/error.hpp"
#include "psychic/nelder_mead.hpp"
#include "psychic/rng.hpp"
#include "psychic/stats.hpp"

namespace psychic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kStartStream = 0x4e4c4cULL;
// Smallest lambda * tau the optimizer explores.
constexpr double kMinRateTau = 1e-8;

JumpDiffusionParams from_theta(const Eigen::VectorXd& theta) {
  JumpDiffusionParams p;
  p.mu_g = theta(0);
  p.sigma_g = std::exp(theta(1));
  p.lambda = std::exp(theta(2));
  p.mu_beta = theta(3);
  p.sigma_beta = std::exp(theta(4));
  return p;
}

Eigen::VectorXd to_theta(const JumpDiffusionParams& p) {
  Eigen::VectorXd theta(5);
  theta << p.mu_g, std::log(std::max(p.sigma_g, kScaleFloor)), std::log(std::max(p.lambda, 1e-300)),
      p.mu_beta, std::log(std::max(p.sigma_beta, kScaleFloor));
  return theta;
}

double gaussian_nll(const Eigen::ArrayXd& d, double tau, double mu, double sigma) {
  const double var = sigma * sigma * tau;
  const double n = static_cast<double>(d.size());
  return 0.5 * n * std::log(2.0 * std::numbers::pi * var) + (d - mu * tau).square().sum() / (2.0 * var);
}

}  // namespace

double sum_log_density(const JumpDiffusionParams& p, const Eigen::Ref<const Eigen::ArrayXd>& displacements,
                       double tau) {
  return TransitionDensity<double>(p, tau).sum_log_pdf(displacements);
}

NllFitResult nll_fit_displacements(const Eigen::Ref<const Eigen::ArrayXd>& displacements, double tau,
                                   const NllFitOptions& options) {
  const Index n = displacements.size();
  if (n < std::max<Index>(options.min_transitions, 2)) {
    throw Error("nll_fit: insufficient data (" + std::to_string(n) + " transitions, need " +
                std::to_string(std::max<Index>(options.min_transitions, 2)) + ")");
  }
  if (!(tau > 0.0)) throw Error("nll_fit: tau must be positive");
  if (!displacements.allFinite()) throw Error("nll_fit: non-finite displacement");
  const Eigen::ArrayXd d = displacements;

  // The scale floors are hard walls; a clamped, flat region below them
  // would leave the simplex wandering.
  const double log_floor = std::log(kScaleFloor);
  const double log_min_rate = std::log(kMinRateTau / tau);
  auto objective = [&](const Eigen::VectorXd& theta) {
    if (theta(1) < log_floor || theta(4) < log_floor || theta(2) < log_min_rate) return kInf;
    const JumpDiffusionParams p = from_theta(theta);
    if (!(p.lambda * tau <= options.max_rate_tau) || !std::isfinite(p.mu_g) || !std::isfinite(p.mu_beta)) {
      return kInf;
    }
    const double ll = TransitionDensity<double>(p, tau).sum_log_pdf(d);
    return std::isfinite(ll) ? -ll : kInf;
  };

  // Closed-form lambda = 0 submodel.
  const double mu0 = d.mean() / tau;
  const double sd = std::sqrt((d - d.mean()).square().mean());
  const double sigma0 = std::max(sd / std::sqrt(tau), kScaleFloor);
  const double diffusion_nll = gaussian_nll(d, tau, mu0, sigma0);

  std::vector<Eigen::VectorXd> starts;
  if (options.warm_start) {
    Eigen::VectorXd theta = to_theta(*options.warm_start);
    theta(2) = std::max(theta(2), log_min_rate);
    starts.push_back(theta);
  } else {
    const double spread = std::max(sd, kScaleFloor);
    JumpDiffusionParams central{mu0, 0.9 * sigma0, 0.05 / tau, 0.0, 2.0 * spread};
    starts.push_back(to_theta(central));
    Philox rng(options.seed, kStartStream);
    for (int s = 1; s < options.starts; ++s) {
      JumpDiffusionParams p;
      p.mu_g = mu0;
      p.lambda = std::exp(std::log(0.005) + rng.uniform() * std::log(2.0 / 0.005)) / tau;
      p.sigma_beta = spread * std::exp(std::log(0.3) + rng.uniform() * std::log(5.0 / 0.3));
      p.sigma_g = sigma0 * (0.5 + 0.5 * rng.uniform());
      p.mu_beta = spread * (2.0 * rng.uniform() - 1.0);
      starts.push_back(to_theta(p));
    }
  }

  Eigen::VectorXd step(5);
  step << std::max(0.2 * std::abs(mu0), 0.2 * sigma0), 0.3,
      0.7, std::max(0.5 * sd, kScaleFloor), 0.5;

  NelderMeadOptions nm;
  nm.max_evaluations = options.max_evaluations;
  nm.f_tol = options.f_tol;
  nm.x_tol = options.x_tol;
  nm.stall_iterations = options.stall_iterations;
  nm.stall_tol = options.stall_tol;

  NllFitResult res;
  res.transitions = n;
  Eigen::VectorXd best_theta;
  double best = kInf;
  for (const Eigen::VectorXd& start : starts) {
    res.start_objectives.push_back(objective(start));
    const NelderMeadResult r = nelder_mead(objective, start, step, nm);
    res.evaluations += r.evaluations;
    res.iterations += r.iterations;
    if (r.f < best) {
      best = r.f;
      best_theta = r.x;
    }
  }
  if (!std::isfinite(best)) throw Error("nll_fit: objective non-finite at every start");

  res.full_params = from_theta(best_theta);
  res.full_objective = best;
  res.params = res.full_params;
  res.objective = best;
  res.jump_model = true;
  if (options.selection == ModelSelection::bic) {
    const double penalty = 0.5 * 3.0 * std::log(static_cast<double>(n));
    if (diffusion_nll - best <= penalty) {
      res.params = JumpDiffusionParams{mu0, sigma0, 0.0, 0.0, 0.0};
      res.objective = diffusion_nll;
      res.jump_model = false;
    }
  }
  const double floor_tol = kScaleFloor * 1.01;
  res.floor_hit = res.params.sigma_g <= floor_tol || (res.jump_model && res.params.sigma_beta <= floor_tol);
  return res;
}

std::vector<NllFitResult> nll_fit(const Trajectory& traj, Index dim, std::span<const int> labels,
                                  int goal_count, const NllFitOptions& options) {
  if (dim < 0 || dim >= traj.dims()) throw Error("nll_fit: dimension out of range");
  if (goal_count < 1) throw Error("nll_fit: need at least one goal");
  const Index transitions = traj.size() - 1;
  if (static_cast<Index>(labels.size()) != transitions && static_cast<Index>(labels.size()) != traj.size()) {
    throw Error("nll_fit: labels must have one entry per transition or per sample");
  }
  const Eigen::VectorXd x = traj.coordinate(dim);
  std::vector<std::vector<double>> per_goal(static_cast<std::size_t>(goal_count));
  for (Index i = 0; i < transitions; ++i) {
    const int g = labels[static_cast<std::size_t>(i)];
    if (g < 0) continue;
    if (g >= goal_count) throw Error("nll_fit: label " + std::to_string(g) + " out of range");
    per_goal[static_cast<std::size_t>(g)].push_back(x(i + 1) - x(i));
  }
  std::vector<NllFitResult> out;
  out.reserve(per_goal.size());
  for (std::size_t g = 0; g < per_goal.size(); ++g) {
    if (static_cast<Index>(per_goal[g].size()) < options.min_transitions) {
      throw Error("nll_fit: insufficient data for goal " + std::to_string(g) + " (" +
                  std::to_string(per_goal[g].size()) + " transitions, need " + std::to_string(options.min_transitions) + ")");
    }
    const Eigen::Map<const Eigen::ArrayXd> d(per_goal[g].data(), static_cast<Index>(per_goal[g].size()));
    out.push_back(nll_fit_displacements(d, traj.dt(), options));
  }
  return out;
}

GoalPosterior goal_posterior(const std::vector<std::vector<JumpDiffusionParams>>& params,
                             const Eigen::MatrixXd& from, const Eigen::MatrixXd& to, double tau,
                             const Eigen::VectorXd& prior, const EmOptions& options) {
  const Index goals = static_cast<Index>(params.size());
  if (goals < 1) throw Error("goal_posterior: need at least one goal");
  if (prior.size() != goals) throw Error("goal_posterior: prior size does not match goal count");
  if ((prior.array() < 0.0).any() || std::abs(prior.sum() - 1.0) > 1e-9) {
    throw Error("goal_posterior: prior must be nonnegative and sum to 1");
  }
  if (from.rows() != to.rows() || from.cols() != to.cols()) throw Error("goal_posterior: shape mismatch");
  const Index n = from.rows();
  const Index dims = from.cols();
  for (const auto& per_dim : params) {
    if (static_cast<Index>(per_dim.size()) != dims) throw Error("goal_posterior: params/dimension mismatch");
  }

  Eigen::MatrixXd ll = Eigen::MatrixXd::Zero(n, goals);
  for (Index g = 0; g < goals; ++g) {
    for (Index d = 0; d < dims; ++d) {
      const TransitionDensity<double> density(params[static_cast<std::size_t>(g)][static_cast<std::size_t>(d)],
                                              tau);
      for (Index i = 0; i < n; ++i) ll(i, g) += density.log_pdf(to(i, d) - from(i, d));
    }
  }

  const Eigen::ArrayXd log_prior0 = prior.array().log();
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(stats::log_sum_exp(ll.row(i).transpose().array() + log_prior0))) {
      throw Error("goal_posterior: every goal has zero likelihood at transition " + std::to_string(i));
    }
  }

  GoalPosterior post;
  Eigen::VectorXd pi = prior;
  Eigen::MatrixXd resp(n, goals);
  auto e_step = [&](const Eigen::VectorXd& weights) {
    const Eigen::ArrayXd log_pi = weights.array().log();
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      const Eigen::ArrayXd row = ll.row(i).transpose().array() + log_pi;
      const double norm = stats::log_sum_exp(row);
      resp.row(i) = (row - norm).exp().matrix().transpose();
      total += norm;
    }
    return total;
  };

  post.log_likelihood_history.push_back(e_step(pi));
  if (n > 0) {
    for (int it = 0; it < options.max_iterations; ++it) {
      const Eigen::VectorXd next = resp.colwise().mean().transpose();
      const double change = (next - pi).cwiseAbs().maxCoeff();
      pi = next;
      post.log_likelihood_history.push_back(e_step(pi));
      ++post.iterations;
      if (change < options.tolerance) break;
    }
  }
  post.prior = pi;
  post.responsibilities = resp;

  const Eigen::ArrayXd score = log_prior0 + ll.colwise().sum().transpose().array();
  post.probabilities = (score - stats::log_sum_exp(score)).exp().matrix();
  post.probabilities /= post.probabilities.sum();
  post.probabilities.maxCoeff(&post.classification);
  return post;
}

double map_envelope(const JumpDiffusionParams& p, double tau) {
  const double rate = p.lambda * tau;
  return std::max(6.0 * p.sigma_g * std::sqrt(tau), 6.0 * p.sigma_beta * std::max(1.0, rate)) +
         std::abs(p.mu_g) * tau + rate * std::abs(p.mu_beta);
}

StateGrid default_grid(const JumpDiffusionParams& p, double x_s, double tau, Index cells) {
  if (cells < 2) throw Error("default_grid: need at least two cells");
  const double half = map_envelope(p, tau);
  return StateGrid{x_s - half, x_s + half, cells};
}

namespace {

void check_grid(const StateGrid& grid) {
  if (grid.cells < 2 || !(grid.hi > grid.lo)) throw Error("state grid needs hi > lo and >= 2 cells");
}

}  // namespace

MapPrediction map_predict(const JumpDiffusionParams& p, double x_s, double tau, const StateGrid& grid) {
  check_grid(grid);
  MapPrediction out;
  out.grid = grid;
  const double mean = x_s + p.mean_displacement(tau);
  if (!grid.contains(mean)) {
    const double h = grid.spacing();
    const double half = map_envelope(p, tau);
    const double lo = std::min(grid.lo, x_s - half);
    const double hi = std::max(grid.hi, x_s + half);
    const Index cells = static_cast<Index>(std::ceil((hi - lo) / h)) + 1;
    out.grid = StateGrid{lo, lo + h * static_cast<double>(cells - 1), cells};
    out.expanded = true;
    if (!out.grid.contains(mean)) {
      throw Error("map_predict: grid excludes the analytic mean " + std::to_string(mean));
    }
  }
  const TransitionDensity<double> density(p, tau);
  double best = -kInf;
  double best_x = x_s;
  for (Index i = 0; i < out.grid.cells; ++i) {
    const double x = out.grid.point(i);
    const double v = density.log_pdf(x - x_s);
    if (!(v > -kInf)) continue;
    const double tol = best > -kInf ? 1e-12 * std::max(1.0, std::abs(best)) : 0.0;
    if (v > best + tol || (std::abs(v - best) <= tol && std::abs(x - x_s) < std::abs(best_x - x_s))) {
      best = v;
      best_x = x;
    }
  }
  out.x_t = best_x;
  out.log_density = best;
  return out;
}

PredictiveInterval predictive_interval(const JumpDiffusionParams& p, double x_s, double tau,
                                       const StateGrid& grid, double mass) {
  check_grid(grid);
  if (!(mass > 0.0 && mass < 1.0)) throw Error("predictive_interval: mass must be in (0, 1)");
  const TransitionDensity<double> density(p, tau);
  Eigen::ArrayXd logp(grid.cells);
  for (Index i = 0; i < grid.cells; ++i) logp(i) = density.log_pdf(grid.point(i) - x_s);
  const Eigen::ArrayXd w = (logp - stats::log_sum_exp(logp)).exp();

  const double lower_q = 0.5 * (1.0 - mass);
  const double upper_q = 1.0 - lower_q;
  // Each grid point carries its mass over a cell centred on it; the CDF is
  // linear inside a cell.
  const double h = grid.spacing();
  auto locate = [&](double q) {
    double cum = 0.0;
    for (Index i = 0; i < grid.cells; ++i) {
      if (cum + w(i) >= q) {
        const double frac = w(i) > 0.0 ? (q - cum) / w(i) : 0.5;
        return grid.point(i) - 0.5 * h + frac * h;
      }
      cum += w(i);
    }
    return grid.hi + 0.5 * h;
  };
  return PredictiveInterval{locate(lower_q), locate(upper_q)};
}

}  // namespace psychic
