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

#include "psychic/km_estimator.hpp"

#include <algorithm>
#include <cmath>

#include "psychic/error.hpp"

namespace psychic {

KMSeries raw_moments(const IncrementSeries& inc) {
  if (inc.size() == 0) throw Error("raw_moments: empty increment series");
  if (!(inc.dt > 0.0)) throw Error("raw_moments: dt must be positive");
  KMSeries k;
  k.dim = inc.dim;
  k.dt = inc.dt;
  k.window = 1;
  const Eigen::ArrayXd dx = inc.values.array();
  const Eigen::ArrayXd sq = dx.square();
  k.m1 = (dx / inc.dt).matrix();
  k.m2 = (sq / inc.dt).matrix();
  k.m4 = (sq.square() / inc.dt).matrix();
  k.m6 = (sq.cube() / inc.dt).matrix();
  k.sigma_beta_sq = Eigen::VectorXd::Zero(inc.size());
  k.lambda = Eigen::VectorXd::Zero(inc.size());
  k.sigma_g_sq = Eigen::VectorXd::Zero(inc.size());
  return k;
}

namespace {

// Prefix sums keep the moving average O(n) for any window.
Eigen::VectorXd moving_average(const Eigen::VectorXd& v, Index window) {
  const Index n = v.size();
  const Index half = window / 2;
  Eigen::VectorXd prefix(n + 1);
  prefix(0) = 0.0;
  for (Index i = 0; i < n; ++i) prefix(i + 1) = prefix(i) + v(i);
  Eigen::VectorXd out(n);
  for (Index i = 0; i < n; ++i) {
    const Index lo = std::max<Index>(0, i - half);
    const Index hi = std::min<Index>(n - 1, i + half);
    out(i) = (prefix(hi + 1) - prefix(lo)) / static_cast<double>(hi - lo + 1);
  }
  return out;
}

}  // namespace

KMSeries smooth(const KMSeries& kms, Index window) {
  if (window < 1 || window > kms.size()) throw Error("smooth: window must be in [1, series length]");
  if (window % 2 == 0) throw Error("smooth: window must be odd");
  KMSeries out = kms;
  out.window = window;
  if (window > 1) {
    out.m1 = moving_average(kms.m1, window);
    // Even moments stay >= 0 up to rounding of the prefix differences.
    out.m2 = moving_average(kms.m2, window).cwiseMax(0.0);
    out.m4 = moving_average(kms.m4, window).cwiseMax(0.0);
    out.m6 = moving_average(kms.m6, window).cwiseMax(0.0);
  }
  out.sigma_beta_sq.setZero();
  out.lambda.setZero();
  out.sigma_g_sq.setZero();
  return out;
}

KmParams km_params_from_moments(double m1, double m2, double m4, double m6, double dt,
                                JumpMoments mode) {
  m2 = std::max(m2, 0.0);
  m4 = std::max(m4, 0.0);
  m6 = std::max(m6, 0.0);
  double j4 = m4;
  double j6 = m6;
  double variance_rate = m2;
  if (mode == JumpMoments::cumulant) {
    j4 = m4 - 3.0 * dt * m2 * m2;
    j6 = m6 - 15.0 * dt * m4 * m2 + 30.0 * dt * dt * m2 * m2 * m2;
    variance_rate = m2 - dt * m1 * m1;
  }
  KmParams p;
  if (j4 > kNoJumpM4Floor && j6 > 0.0) {
    p.sigma_beta_sq = j6 / (5.0 * j4);
    p.lambda = j4 / (3.0 * p.sigma_beta_sq * p.sigma_beta_sq);
    if (!std::isfinite(p.lambda) || !std::isfinite(p.sigma_beta_sq)) p = KmParams{};
  }
  p.sigma_g_sq = std::max(0.0, variance_rate - p.lambda * p.sigma_beta_sq);
  return p;
}

KMSeries jump_params(KMSeries kms, JumpMoments mode) {
  kms.moments = mode;
  for (Index i = 0; i < kms.size(); ++i) {
    const KmParams p = km_params_from_moments(kms.m1(i), kms.m2(i), kms.m4(i), kms.m6(i), kms.dt, mode);
    kms.sigma_beta_sq(i) = p.sigma_beta_sq;
    kms.lambda(i) = p.lambda;
  }
  return kms;
}

KMSeries diffusion_param(KMSeries kms) {
  for (Index i = 0; i < kms.size(); ++i) {
    double variance_rate = std::max(kms.m2(i), 0.0);
    if (kms.moments == JumpMoments::cumulant) variance_rate -= kms.dt * kms.m1(i) * kms.m1(i);
    kms.sigma_g_sq(i) = std::max(0.0, variance_rate - kms.lambda(i) * kms.sigma_beta_sq(i));
  }
  return kms;
}

KMSeries estimate_km(const Trajectory& traj, Index dim, Index window, JumpMoments mode) {
  KMSeries k = raw_moments(increments(traj, dim));
  if (window > k.size()) window = k.size() % 2 == 1 ? k.size() : k.size() - 1;
  return diffusion_param(jump_params(smooth(k, window), mode));
}

}  // namespace psychic
