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

#ifndef PSYCHIC_NELDER_MEAD_HPP_
#define PSYCHIC_NELDER_MEAD_HPP_

#include <Eigen/Core>

#include <functional>

namespace psychic {

struct NelderMeadOptions {
  int max_evaluations = 2000;
  // Stop when the simplex values span <= f_tol * max(1, |f_best|) and every
  // vertex is within x_tol of the best one (infinity norm).
  double f_tol = 1e-10;
  double x_tol = 1e-7;
  // Also stop when the best value has dropped by less than stall_tol over
  // the last stall_iterations iterations (0 disables). Guards against slow
  // crawls along near-flat ridges.
  int stall_iterations = 0;
  double stall_tol = 0.0;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
};

// Downhill simplex with the standard coefficients (1, 2, 1/2, 1/2). The
// initial simplex is x0 plus step(i) along each axis. Non-finite objective
// values are treated as +inf.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                             const NelderMeadOptions& options = {});

}  // namespace psychic

#endif  // PSYCHIC_NELDER_MEAD_HPP_
