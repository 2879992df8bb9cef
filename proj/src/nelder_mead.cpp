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

#include "psychic/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "psychic/error.hpp"

namespace psychic {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                             const NelderMeadOptions& options) {
  const Eigen::Index n = x0.size();
  if (n < 1 || step.size() != n) throw Error("nelder_mead: dimension mismatch");

  NelderMeadResult res;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++res.evaluations;
    const double f = objective(x);
    return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
  };

  std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> values(static_cast<std::size_t>(n + 1));
  values[0] = eval(x0);
  for (Eigen::Index i = 0; i < n; ++i) {
    simplex[static_cast<std::size_t>(i + 1)](i) += step(i);
    values[static_cast<std::size_t>(i + 1)] = eval(simplex[static_cast<std::size_t>(i + 1)]);
  }

  std::vector<std::size_t> order(simplex.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<Eigen::VectorXd> s(simplex.size());
    std::vector<double> v(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      s[i] = std::move(simplex[order[i]]);
      v[i] = values[order[i]];
    }
    simplex = std::move(s);
    values = std::move(v);
  };

  sort_simplex();
  std::vector<double> best_history;
  while (res.evaluations < options.max_evaluations) {
    const double spread = values.back() - values.front();
    double extent = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      extent = std::max(extent, (simplex[i] - simplex[0]).cwiseAbs().maxCoeff());
    }
    if (std::isfinite(values.back()) && spread <= options.f_tol * std::max(1.0, std::abs(values.front())) && extent <= options.x_tol) {
      res.converged = true;
      break;
    }
    if (options.stall_iterations > 0) {
      best_history.push_back(values.front());
      const std::size_t w = static_cast<std::size_t>(options.stall_iterations);
      if (best_history.size() > w &&
          best_history[best_history.size() - 1 - w] - values.front() < options.stall_tol) {
        res.converged = true;
        break;
      }
    }
    ++res.iterations;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < simplex.size(); ++i) centroid += simplex[i];
    centroid /= static_cast<double>(n);
    const Eigen::VectorXd& worst = simplex.back();

    const Eigen::VectorXd reflected = centroid + (centroid - worst);
    const double f_r = eval(reflected);
    if (f_r < values.front()) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - worst);
      const double f_e = eval(expanded);
      if (f_e < f_r) {
        simplex.back() = expanded;
        values.back() = f_e;
      } else {
        simplex.back() = reflected;
        values.back() = f_r;
      }
    } else if (f_r < values[values.size() - 2]) {
      simplex.back() = reflected;
      values.back() = f_r;
    } else {
      const bool outside = f_r < values.back();
      const Eigen::VectorXd contracted =
          outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                  : Eigen::VectorXd(centroid + 0.5 * (worst - centroid));
      const double f_c = eval(contracted);
      if (f_c < (outside ? f_r : values.back())) {
        simplex.back() = contracted;
        values.back() = f_c;
      } else {
        for (std::size_t i = 1; i < simplex.size(); ++i) {
          simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
          values[i] = eval(simplex[i]);
        }
      }
    }
    sort_simplex();
  }
  res.x = simplex.front();
  res.f = values.front();
  return res;
}

}  // namespace psychic
