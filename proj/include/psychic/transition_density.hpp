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

// Poisson-normal transition density of the jump-drift-diffusion model.
//
// For a horizon tau and displacement d = x_t - x_s,
//
//   p(d) = sum_k Poisson(k; lambda tau) N(d; mu_g tau + k mu_beta,
//                                          sigma_g^2 tau + k sigma_beta^2)
//
// evaluated in log space. The series is cut at
// K_max = ceil(lambda tau + 10 sqrt(lambda tau + 1) + 10), which leaves a
// Poisson tail far below 1e-12. Per-term constants are computed once per
// (params, tau) so repeated evaluations only pay for the quadratic and exp.

#ifndef PSYCHIC_TRANSITION_DENSITY_HPP_
#define PSYCHIC_TRANSITION_DENSITY_HPP_

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "psychic/error.hpp"
#include "psychic/stats.hpp"

namespace psychic {

template <typename Scalar>
struct BasicJumpDiffusionParams {
  Scalar mu_g = 0;        // m/s
  Scalar sigma_g = 0;     // m/sqrt(s)
  Scalar lambda = 0;      // 1/s
  Scalar mu_beta = 0;     // m
  Scalar sigma_beta = 0;  // m

  bool degenerate() const { return sigma_g <= 0 && (lambda <= 0 || sigma_beta <= 0); }

  // Mean displacement over tau.
  Scalar mean_displacement(Scalar tau) const { return mu_g * tau + lambda * tau * mu_beta; }

  template <typename Other>
  BasicJumpDiffusionParams<Other> cast() const {
    return {Other(mu_g), Other(sigma_g), Other(lambda), Other(mu_beta), Other(sigma_beta)};
  }
};

using JumpDiffusionParams = BasicJumpDiffusionParams<double>;

// Beyond this the Poisson series is no longer a sensible representation.
inline constexpr double kMaxSeriesRate = 1e5;

inline int poisson_series_terms(double rate) {
  return static_cast<int>(std::ceil(rate + 10.0 * std::sqrt(rate + 1.0) + 10.0));
}

template <typename Scalar>
class TransitionDensity {
 public:
  // extra_terms extends K_max; used to check truncation stability.
  TransitionDensity(const BasicJumpDiffusionParams<Scalar>& p, Scalar tau, int extra_terms = 0) {
    if (!(tau > 0) || !std::isfinite(tau)) throw Error("transition density: tau must be positive and finite");
    using std::isfinite;
    if (!isfinite(p.mu_g) || !isfinite(p.sigma_g) || !isfinite(p.lambda) || !isfinite(p.mu_beta) ||
        !isfinite(p.sigma_beta)) {
      throw Error("transition density: non-finite parameter");
    }
    if (p.degenerate()) throw Error("transition density: degenerate parameters (all variances zero)");
    if (p.sigma_g < 0 || p.lambda < 0 || p.sigma_beta < 0) {
      throw Error("transition density: negative scale parameter");
    }
    const Scalar rate = p.lambda * tau;
    if (rate > Scalar(kMaxSeriesRate)) throw Error("transition density: lambda * tau too large for the series");
    const int k_max = rate > 0 ? poisson_series_terms(static_cast<double>(rate)) + extra_terms : 0;
    const Scalar log_rate = rate > 0 ? std::log(rate) : Scalar(0);
    const Scalar diffusive = p.sigma_g * p.sigma_g * tau;
    const Scalar jump_var = p.sigma_beta * p.sigma_beta;
    terms_.reserve(static_cast<std::size_t>(k_max + 1));
    for (int k = 0; k <= k_max; ++k) {
      const Scalar var = diffusive + Scalar(k) * jump_var;
      Term t;
      t.mean = p.mu_g * tau + Scalar(k) * p.mu_beta;
      if (var > 0) {
        t.inv_two_var = Scalar(1) / (Scalar(2) * var);
        t.log_const = Scalar(k) * log_rate - rate - Scalar(stats::log_factorial(k)) -
                      Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar> * var);
      } else {
        // A zero-variance term is an atom, which has no density.
        t.inv_two_var = 0;
        t.log_const = -std::numeric_limits<Scalar>::infinity();
      }
      terms_.push_back(t);
    }
    suffix_max_.assign(terms_.size(), -std::numeric_limits<Scalar>::infinity());
    for (std::size_t k = terms_.size(); k-- > 0;) {
      suffix_max_[k] = std::max(terms_[k].log_const,
                                k + 1 < terms_.size() ? suffix_max_[k + 1]
                                                      : -std::numeric_limits<Scalar>::infinity());
    }
  }

  // log p(d). Terms are skipped once every remaining one is below
  // exp(-37) of the running maximum, which cannot move the result.
  Scalar log_pdf(Scalar displacement) const {
    stats::LogSumExp<Scalar> acc;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      if (suffix_max_[k] < acc.max() - kCutoff) break;
      const Term& t = terms_[k];
      if (t.log_const == -std::numeric_limits<Scalar>::infinity()) continue;
      const Scalar r = displacement - t.mean;
      acc.add(t.log_const - r * r * t.inv_two_var);
    }
    return acc.value();
  }

  // Sum over every term with no early exit.
  Scalar log_pdf_exhaustive(Scalar displacement) const {
    stats::LogSumExp<Scalar> acc;
    for (const Term& t : terms_) {
      if (t.log_const == -std::numeric_limits<Scalar>::infinity()) continue;
      const Scalar r = displacement - t.mean;
      acc.add(t.log_const - r * r * t.inv_two_var);
    }
    return acc.value();
  }

  template <typename Derived>
  Eigen::Array<Scalar, Eigen::Dynamic, 1> log_pdf(const Eigen::ArrayBase<Derived>& displacements) const {
    Eigen::Array<Scalar, Eigen::Dynamic, 1> out(displacements.size());
    for (Eigen::Index i = 0; i < displacements.size(); ++i) out(i) = log_pdf(displacements(i));
    return out;
  }

  // Sum of log p(d_i), one series term at a time across the whole batch. A
  // term is dropped once it sits 37 nats below every row's running maximum.
  template <typename Derived>
  Scalar sum_log_pdf(const Eigen::ArrayBase<Derived>& displacements) const {
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
    const Eigen::Index n = displacements.size();
    if (n == 0) return Scalar(0);
    constexpr Scalar kNegInf = -std::numeric_limits<Scalar>::infinity();
    std::vector<Array> columns;
    Array row_max = Array::Constant(n, kNegInf);
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      if (!columns.empty() && suffix_max_[k] < row_max.minCoeff() - kCutoff) break;
      const Term& t = terms_[k];
      if (t.log_const == kNegInf) continue;
      columns.push_back(t.log_const - (displacements - t.mean).square() * t.inv_two_var);
      row_max = row_max.max(columns.back());
    }
    Array total = Array::Zero(n);
    for (const Array& c : columns) total += (c - row_max).exp();
    return (row_max + total.log()).sum();
  }

  int series_terms() const { return static_cast<int>(terms_.size()); }

 private:
  // exp(-37) is below half an ulp of 1.
  static constexpr Scalar kCutoff = Scalar(37);

  struct Term {
    Scalar mean;
    Scalar inv_two_var;
    Scalar log_const;
  };
  std::vector<Term> terms_;
  std::vector<Scalar> suffix_max_;
};

// log P(x_t | x_s) over horizon tau.
template <typename Scalar>
Scalar transition_logpdf(const BasicJumpDiffusionParams<Scalar>& p, Scalar x_s, Scalar x_t, Scalar tau) {
  return TransitionDensity<Scalar>(p, tau).log_pdf(x_t - x_s);
}

}  // namespace psychic

#endif  // PSYCHIC_TRANSITION_DENSITY_HPP_
