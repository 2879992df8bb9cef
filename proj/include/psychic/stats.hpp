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

// Small numerical helpers shared across modules.

#ifndef PSYCHIC_STATS_HPP_
#define PSYCHIC_STATS_HPP_

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <span>

namespace psychic::stats {

using Eigen::Index;

// log(sum(exp(v))) without overflow; -inf for an empty or all -inf input.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (v.size() == 0) return -std::numeric_limits<Scalar>::infinity();
  const Scalar m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.derived().array() - m).exp().sum());
}

// Running log-sum-exp accumulator; avoids materialising the term vector.
template <typename Scalar>
class LogSumExp {
 public:
  void add(Scalar a) {
    if (a == -std::numeric_limits<Scalar>::infinity()) return;
    if (a <= max_) {
      sum_ += std::exp(a - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - a) + Scalar(1);
      max_ = a;
    }
  }
  Scalar max() const { return max_; }
  Scalar value() const {
    return sum_ > Scalar(0) ? max_ + std::log(sum_)
                            : -std::numeric_limits<Scalar>::infinity();
  }

 private:
  Scalar max_ = -std::numeric_limits<Scalar>::infinity();
  Scalar sum_ = Scalar(0);
};

double median(std::span<const double> values);
double median(const Eigen::Ref<const Eigen::VectorXd>& values);

// Median absolute deviation around the median (unscaled).
double mad(std::span<const double> values);

// Linear-interpolation quantile (the "type 7" definition), q in [0, 1].
double quantile(std::span<const double> values, double q);

double mean(const Eigen::Ref<const Eigen::VectorXd>& values);
// Population variance (divides by n).
double population_variance(const Eigen::Ref<const Eigen::VectorXd>& values);
// Sample variance (divides by n - 1).
double sample_variance(const Eigen::Ref<const Eigen::VectorXd>& values);
// Adjusted Fisher-Pearson sample skewness; 0 for a constant sample.
double skewness(const Eigen::Ref<const Eigen::VectorXd>& values);

double normal_cdf(double z);
double normal_log_pdf(double x, double mean, double variance);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double dof);
// Quantile of the Student t distribution, p in (0, 1).
double student_t_quantile(double p, double dof);

// log(k!) for small integer k via a cached table, falling back to lgamma.
double log_factorial(int k);

}  // namespace psychic::stats

#endif  // PSYCHIC_STATS_HPP_
