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

// Per-timestep Kramers-Moyal moments and the jump/diffusion parameters they
// imply.
//
//   M1 = dx / dt (signed), Mn = |dx|^n / dt for n in {2, 4, 6}
//   sigma_beta^2 = M6 / (5 M4),  lambda = M4 / (3 sigma_beta^4)
//   sigma_g^2    = M2 - lambda sigma_beta^2
//
// The jump relations hold in the dt -> 0 limit, where the diffusive part of
// M4 and M6 vanishes. At a finite step (20 Hz capture) the Gaussian part still
// dominates M4, so the default `cumulant` mode first removes it by converting
// the moment rates to cumulant rates before applying the same relations:
//   J4 = M4 - 3 dt M2^2
//   J6 = M6 - 15 dt M4 M2 + 30 dt^2 M2^3
// and the diffusion term uses the variance rate M2 - dt M1^2. `literal`
// applies the relations to the moments as they are.

#ifndef PSYCHIC_KM_ESTIMATOR_HPP_
#define PSYCHIC_KM_ESTIMATOR_HPP_

#include <Eigen/Core>

#include "psychic/trajectory.hpp"

namespace psychic {

enum class JumpMoments { literal, cumulant };

// Below this M4 (m^4/s) a step is treated as jump-free.
inline constexpr double kNoJumpM4Floor = 1e-12;
inline constexpr Index kDefaultKmWindow = 21;

struct KMSeries {
  Index dim = 0;
  double dt = 0.0;
  Index window = 1;
  JumpMoments moments = JumpMoments::cumulant;
  Eigen::VectorXd m1, m2, m4, m6;
  Eigen::VectorXd sigma_beta_sq, lambda, sigma_g_sq;

  Index size() const { return m1.size(); }
};

KMSeries raw_moments(const IncrementSeries& inc);

// Centered moving average of M1..M6 with shrunken windows at the edges.
// The derived tracks are reset to zero.
KMSeries smooth(const KMSeries& kms, Index window);

// Fills sigma_beta_sq and lambda. Steps without jump signal clamp to zero.
KMSeries jump_params(KMSeries kms, JumpMoments mode = JumpMoments::cumulant);

// Fills sigma_g_sq = max(0, variance rate - lambda sigma_beta^2), using the
// mode recorded by jump_params.
KMSeries diffusion_param(KMSeries kms);

// Scalar form of the two steps above, shared with the regression pathway.
struct KmParams {
  double sigma_beta_sq = 0.0;
  double lambda = 0.0;
  double sigma_g_sq = 0.0;
};
KmParams km_params_from_moments(double m1, double m2, double m4, double m6, double dt,
                                JumpMoments mode);

// raw_moments -> smooth -> jump_params -> diffusion_param on one dimension.
KMSeries estimate_km(const Trajectory& traj, Index dim, Index window = kDefaultKmWindow,
                     JumpMoments mode = JumpMoments::cumulant);

}  // namespace psychic

#endif  // PSYCHIC_KM_ESTIMATOR_HPP_
