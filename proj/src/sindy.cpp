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

#include "psychic/sindy.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

#include "psychic/error.hpp"

namespace psychic {

namespace {

const std::vector<std::string>& known_custom_terms() {
  static const std::vector<std::string> terms = {"X-g", "g-X", "abs(X-g)", "X^3", "g^3"};
  return terms;
}

double eval_custom(const std::string& name, double x, double g) {
  if (name == "X-g") return x - g;
  if (name == "g-X") return g - x;
  if (name == "abs(X-g)") return std::abs(x - g);
  if (name == "X^3") return x * x * x;
  return g * g * g;  // "g^3"
}

}  // namespace

LibrarySpec LibrarySpec::named(const std::string& name) {
  LibrarySpec s;
  if (name == "default2") return s;
  if (name == "default1") {
    s.degree = 1;
    return s;
  }
  throw Error("unknown library '" + name + "' (expected default1 or default2)");
}

FunctionLibrary::FunctionLibrary(const LibrarySpec& spec) : spec_(spec) {
  if (spec.degree < 0 || spec.degree > 2) throw Error("library degree must be 0, 1 or 2");
  names_.push_back("1");
  if (spec.degree >= 1) {
    names_.push_back("X");
    names_.push_back("g");
  }
  if (spec.degree >= 2) {
    names_.push_back("X^2");
    if (spec.cross_terms) names_.push_back("X*g");
    names_.push_back("g^2");
  }
  for (const std::string& c : spec.custom) {
    const auto& known = known_custom_terms();
    if (std::find(known.begin(), known.end(), c) == known.end()) {
      throw Error("unknown custom library term '" + c + "'");
    }
    if (std::find(names_.begin(), names_.end(), c) != names_.end()) {
      throw Error("duplicate library term '" + c + "'");
    }
    names_.push_back(c);
  }
}

Eigen::RowVectorXd FunctionLibrary::evaluate(double x, double g) const {
  Eigen::RowVectorXd row(size());
  Index j = 0;
  row(j++) = 1.0;
  if (spec_.degree >= 1) {
    row(j++) = x;
    row(j++) = g;
  }
  if (spec_.degree >= 2) {
    row(j++) = x * x;
    if (spec_.cross_terms) row(j++) = x * g;
    row(j++) = g * g;
  }
  for (const std::string& c : spec_.custom) row(j++) = eval_custom(c, x, g);
  return row;
}

Eigen::MatrixXd build_library(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const FunctionLibrary& library) {
  if (x.size() != g.size()) throw Error("build_library: x and g differ in length");
  Eigen::MatrixXd theta(x.size(), library.size());
  for (Index i = 0; i < x.size(); ++i) theta.row(i) = library.evaluate(x(i), g(i));
  if (!theta.allFinite()) throw Error("build_library: non-finite basis evaluation");
  return theta;
}

Index SindyModel::active_count() const {
  return static_cast<Index>(std::count(active.begin(), active.end(), true));
}

namespace {

// Least squares on the listed columns; returns coefficients in that order.
Eigen::VectorXd solve_subset(const Eigen::MatrixXd& a, const std::vector<Index>& cols, const Eigen::VectorXd& y) {
  Eigen::MatrixXd sub(a.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Index>(k)) = a.col(cols[k]);
  return sub.colPivHouseholderQr().solve(y);
}

double subset_rss(const Eigen::MatrixXd& a, const std::vector<Index>& cols, const Eigen::VectorXd& coef,
                  const Eigen::VectorXd& y) {
  Eigen::VectorXd r = y;
  for (std::size_t k = 0; k < cols.size(); ++k) r -= coef(static_cast<Index>(k)) * a.col(cols[k]);
  return r.squaredNorm();
}

}  // namespace

SindyModel ssr_fit(const Eigen::MatrixXd& design, const std::vector<std::string>& names,
                   const Eigen::VectorXd& target, const SsrOptions& options, const std::string& target_name) {
  const Index rows = design.rows();
  const Index cols = design.cols();
  if (static_cast<Index>(names.size()) != cols) throw Error("ssr_fit: names do not match design columns");
  if (target.size() != rows) throw Error("ssr_fit: target length does not match design rows");
  if (cols < 1) throw Error("ssr_fit: empty design");
  if (rows < 2 * cols) {
    throw Error("ssr_fit: too few rows (" + std::to_string(rows) + " for " + std::to_string(cols) + " columns)");
  }
  if (!target.allFinite()) throw Error("ssr_fit: non-finite target");
  if (!design.allFinite()) throw Error("ssr_fit: non-finite design");

  const Eigen::VectorXd norms = design.colwise().norm().transpose();
  const double max_norm = norms.maxCoeff();
  std::vector<Index> kept;
  std::vector<std::string> dependent;
  for (Index j = 0; j < cols; ++j) {
    if (norms(j) > 1e-12 * std::max(max_norm, 1e-300)) {
      kept.push_back(j);
    } else {
      dependent.push_back(names[static_cast<std::size_t>(j)]);
    }
  }
  Eigen::MatrixXd unit(rows, cols);
  for (Index j = 0; j < cols; ++j) unit.col(j) = norms(j) > 0.0 ? Eigen::VectorXd(design.col(j) / norms(j)) : design.col(j);

  if (!kept.empty()) {
    Eigen::MatrixXd sub(rows, static_cast<Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) sub.col(static_cast<Index>(k)) = unit.col(kept[k]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
    qr.setThreshold(1e-10);
    const Index rank = qr.rank();
    if (rank < static_cast<Index>(kept.size())) {
      std::vector<Index> independent;
      std::vector<bool> is_independent(kept.size(), false);
      for (Index k = 0; k < rank; ++k) is_independent[static_cast<std::size_t>(qr.colsPermutation().indices()(k))] = true;
      for (std::size_t k = 0; k < kept.size(); ++k) {
        if (is_independent[k]) {
          independent.push_back(kept[k]);
        } else {
          dependent.push_back(names[static_cast<std::size_t>(kept[k])]);
        }
      }
      kept = independent;
    }
  }
  if (!dependent.empty() && !options.drop_dependent) {
    std::string list;
    for (const std::string& d : dependent) list += (list.empty() ? "" : ", ") + d;
    throw RankDeficientError("ssr_fit: rank-deficient design; dependent columns: " + list, dependent);
  }
  if (kept.empty()) throw Error("ssr_fit: no usable columns");

  SindyModel model;
  model.target = target_name;
  model.terms = names;
  model.dropped = dependent;

  struct Candidate {
    std::vector<Index> cols;
    Eigen::VectorXd coef;
    double rss;
  };
  std::vector<Candidate> candidates;
  std::vector<Index> active = kept;
  Eigen::VectorXd coef = solve_subset(unit, active, target);
  candidates.push_back({active, coef, subset_rss(unit, active, coef, target)});
  while (active.size() > 1) {
    Index drop = 0;
    for (Index k = 1; k < coef.size(); ++k) {
      if (std::abs(coef(k)) < std::abs(coef(drop))) drop = k;
    }
    const std::string removed = names[static_cast<std::size_t>(active[static_cast<std::size_t>(drop)])];
    active.erase(active.begin() + drop);
    coef = solve_subset(unit, active, target);
    const double rss = subset_rss(unit, active, coef, target);
    // Removing a regressor cannot lower the least-squares residual; pin
    // rounding so the recorded path is monotone.
    candidates.push_back({active, coef, std::max(rss, candidates.back().rss)});
    model.path.push_back({removed, static_cast<Index>(active.size()), candidates.back().rss});
  }

  double min_rss = std::numeric_limits<double>::infinity();
  for (const Candidate& c : candidates) min_rss = std::min(min_rss, c.rss);
  const double limit = (1.0 + options.epsilon) * min_rss + 1e-24 * target.squaredNorm();
  const Candidate* chosen = &candidates.front();
  for (const Candidate& c : candidates) {
    if (c.rss <= limit && c.cols.size() <= chosen->cols.size()) chosen = &c;
  }

  model.coefficients = Eigen::VectorXd::Zero(cols);
  model.active.assign(static_cast<std::size_t>(cols), false);
  for (std::size_t k = 0; k < chosen->cols.size(); ++k) {
    const Index j = chosen->cols[k];
    model.coefficients(j) = chosen->coef(static_cast<Index>(k)) / norms(j);
    model.active[static_cast<std::size_t>(j)] = true;
  }
  model.rss = chosen->rss;
  model.full_rss = candidates.front().rss;
  return model;
}

KmModels fit_km_models(const KMSeries& kms, const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                       const FunctionLibrary& library, const SindyOptions& options) {
  if (x.size() != kms.size() || g.size() != kms.size()) {
    throw Error("fit_km_models: state/goal series not aligned with the moment series");
  }
  const Eigen::MatrixXd theta = build_library(x, g, library);
  KmModels models{library, kms.moments, kms.dt, {}, {}, {}, {}, std::nullopt};
  models.m1 = ssr_fit(theta, library.names(), kms.m1, options.ssr, "M1");
  models.m2 = ssr_fit(theta, library.names(), kms.m2, options.ssr, "M2");
  models.m4 = ssr_fit(theta, library.names(), kms.m4, options.ssr, "M4");
  models.m6 = ssr_fit(theta, library.names(), kms.m6, options.ssr, "M6");
  if (options.relax_mu_beta) {
    if (kms.window != 1) throw Error("fit_km_models: the mu_beta-relaxed variant needs unsmoothed moments");
    // With one increment per row, dx = M1 dt and M3 = dx^3 / dt.
    const Eigen::VectorXd m3 = (kms.m1.array().cube() * kms.dt * kms.dt).matrix();
    models.m3 = ssr_fit(theta, library.names(), m3, options.ssr, "M3");
  }
  return models;
}

KmPrediction predict_km(const KmModels& models, double x, double g) {
  const Eigen::RowVectorXd row = models.library.evaluate(x, g);
  KmPrediction out;
  out.m1 = models.m1.predict(row);
  out.m2 = std::max(0.0, models.m2.predict(row));
  out.m4 = std::max(0.0, models.m4.predict(row));
  out.m6 = std::max(0.0, models.m6.predict(row));
  const KmParams kp = km_params_from_moments(out.m1, out.m2, out.m4, out.m6, models.dt, models.moments);
  JumpDiffusionParams& p = out.params;
  p.lambda = kp.lambda;
  p.sigma_beta = std::sqrt(kp.sigma_beta_sq);
  double sigma_g_sq = kp.sigma_g_sq;
  // Near-Gaussian moments imply a flood of tiny jumps; cut the rate and hand
  // the freed variance back to the diffusion.
  if (p.lambda * models.dt > kMaxRateTau) {
    sigma_g_sq += (p.lambda - kMaxRateTau / models.dt) * kp.sigma_beta_sq;
    p.lambda = kMaxRateTau / models.dt;
    out.rate_capped = true;
  }
  if (models.m3 && p.lambda > 0.0) {
    double m3 = models.m3->predict(row);
    if (models.moments == JumpMoments::cumulant) {
      const double dt = models.dt;
      m3 -= 3.0 * dt * out.m2 * out.m1 - 2.0 * dt * dt * out.m1 * out.m1 * out.m1;
    }
    // mu^3 + 3 mu sigma_beta^2 = M3 / lambda has one real root.
    const double pc = 3.0 * kp.sigma_beta_sq;
    const double qc = -m3 / p.lambda;
    const double disc = std::sqrt(qc * qc / 4.0 + pc * pc * pc / 27.0);
    p.mu_beta = std::cbrt(-qc / 2.0 + disc) + std::cbrt(-qc / 2.0 - disc);
    sigma_g_sq = std::max(0.0, sigma_g_sq - p.lambda * p.mu_beta * p.mu_beta);
  }
  p.mu_g = out.m1 - p.lambda * p.mu_beta;
  if (sigma_g_sq <= 0.0) {
    out.variance_floor = true;
    p.sigma_g = kScaleFloor;
  } else {
    p.sigma_g = std::max(std::sqrt(sigma_g_sq), kScaleFloor);
  }
  return out;
}

SindyPrediction sindy_step(const KmModels& models, double x_s, double g, double tau,
                           const std::optional<StateGrid>& grid) {
  const KmPrediction kp = predict_km(models, x_s, g);
  SindyPrediction out;
  out.params = kp.params;
  out.variance_floor = kp.variance_floor;
  out.map = map_predict(kp.params, x_s, tau, grid ? *grid : default_grid(kp.params, x_s, tau));
  return out;
}

nlohmann::json to_json(const SindyModel& model) {
  nlohmann::json terms = nlohmann::json::array();
  for (std::size_t j = 0; j < model.terms.size(); ++j) {
    terms.push_back({{"name", model.terms[j]},
                     {"coefficient", model.coefficients(static_cast<Index>(j))},
                     {"active", static_cast<bool>(model.active[j])}});
  }
  nlohmann::json path = nlohmann::json::array();
  for (const EliminationStep& s : model.path) {
    path.push_back({{"removed", s.removed}, {"active", s.active}, {"rss", s.rss}});
  }
  return {{"target", model.target}, {"terms", terms},        {"rss", model.rss},
          {"full_rss", model.full_rss}, {"path", path}, {"dropped", model.dropped}};
}

nlohmann::json to_json(const KmModels& models) {
  const LibrarySpec& spec = models.library.spec();
  nlohmann::json j = {
      {"library", {{"degree", spec.degree}, {"cross_terms", spec.cross_terms}, {"custom", spec.custom}}},
      {"moments", models.moments == JumpMoments::cumulant ? "cumulant" : "literal"},
      {"dt", models.dt},
      {"targets", nlohmann::json::array({to_json(models.m1), to_json(models.m2), to_json(models.m4),
                                         to_json(models.m6)})}};
  if (models.m3) j["targets"].push_back(to_json(*models.m3));
  return j;
}

SindyModel sindy_model_from_json(const nlohmann::json& j) {
  SindyModel m;
  m.target = j.at("target").get<std::string>();
  const auto& terms = j.at("terms");
  m.coefficients = Eigen::VectorXd::Zero(static_cast<Index>(terms.size()));
  for (std::size_t k = 0; k < terms.size(); ++k) {
    m.terms.push_back(terms[k].at("name").get<std::string>());
    m.coefficients(static_cast<Index>(k)) = terms[k].at("coefficient").get<double>();
    m.active.push_back(terms[k].at("active").get<bool>());
  }
  m.rss = j.value("rss", 0.0);
  m.full_rss = j.value("full_rss", 0.0);
  for (const auto& s : j.value("path", nlohmann::json::array())) {
    m.path.push_back({s.at("removed").get<std::string>(), s.at("active").get<Index>(), s.at("rss").get<double>()});
  }
  m.dropped = j.value("dropped", std::vector<std::string>{});
  return m;
}

KmModels km_models_from_json(const nlohmann::json& j) {
  LibrarySpec spec;
  const auto& lib = j.at("library");
  spec.degree = lib.at("degree").get<int>();
  spec.cross_terms = lib.at("cross_terms").get<bool>();
  spec.custom = lib.value("custom", std::vector<std::string>{});
  KmModels models{FunctionLibrary(spec), JumpMoments::cumulant, j.at("dt").get<double>(), {}, {}, {}, {},
                  std::nullopt};
  const std::string moments = j.at("moments").get<std::string>();
  if (moments == "literal") {
    models.moments = JumpMoments::literal;
  } else if (moments != "cumulant") {
    throw Error("unknown moments mode '" + moments + "'");
  }
  for (const auto& t : j.at("targets")) {
    SindyModel m = sindy_model_from_json(t);
    if (m.terms != models.library.names()) throw Error("model terms do not match the library");
    if (m.target == "M1") {
      models.m1 = std::move(m);
    } else if (m.target == "M2") {
      models.m2 = std::move(m);
    } else if (m.target == "M4") {
      models.m4 = std::move(m);
    } else if (m.target == "M6") {
      models.m6 = std::move(m);
    } else if (m.target == "M3") {
      models.m3 = std::move(m);
    } else {
      throw Error("unknown target '" + m.target + "'");
    }
  }
  return models;
}

}  // namespace psychic
