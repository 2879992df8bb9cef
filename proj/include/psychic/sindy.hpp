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

// Sparse regression of Kramers-Moyal moment tracks onto a candidate library
// Theta(X, g), with a stepwise sparse regressor (backward elimination).

#ifndef PSYCHIC_SINDY_HPP_
#define PSYCHIC_SINDY_HPP_

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "psychic/km_estimator.hpp"
#include "psychic/mixture_pdf.hpp"

namespace psychic {

struct LibrarySpec {
  int degree = 2;
  bool cross_terms = true;
  // Extra named terms. Known: "X-g", "g-X", "abs(X-g)", "X^3", "g^3".
  std::vector<std::string> custom;

  // "default2" (the default) or "default1".
  static LibrarySpec named(const std::string& name);
};

class FunctionLibrary {
 public:
  explicit FunctionLibrary(const LibrarySpec& spec = {});

  const LibrarySpec& spec() const { return spec_; }
  const std::vector<std::string>& names() const { return names_; }
  Index size() const { return static_cast<Index>(names_.size()); }

  Eigen::RowVectorXd evaluate(double x, double g) const;

 private:
  LibrarySpec spec_;
  std::vector<std::string> names_;
};

// Rows are samples, columns follow library.names().
Eigen::MatrixXd build_library(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const FunctionLibrary& library);

struct SsrOptions {
  // Keep the sparsest model with rss <= (1 + epsilon) min rss.
  double epsilon = 0.1;
  // Drop linearly dependent columns before elimination instead of failing.
  bool drop_dependent = false;
};

struct EliminationStep {
  std::string removed;
  Index active = 0;  // terms left after the removal
  double rss = 0.0;
};

struct SindyModel {
  std::string target;
  std::vector<std::string> terms;
  Eigen::VectorXd coefficients;  // zero where inactive
  std::vector<bool> active;
  double rss = 0.0;
  double full_rss = 0.0;
  std::vector<EliminationStep> path;
  std::vector<std::string> dropped;

  Index active_count() const;
  double predict(const Eigen::RowVectorXd& row) const { return row.dot(coefficients.transpose()); }
  Eigen::VectorXd predict(const Eigen::MatrixXd& design) const { return design * coefficients; }
};

SindyModel ssr_fit(const Eigen::MatrixXd& design, const std::vector<std::string>& names,
                   const Eigen::VectorXd& target, const SsrOptions& options = {},
                   const std::string& target_name = "y");

struct SindyOptions {
  SsrOptions ssr;
  // Fit a third-moment model and solve for mu_beta instead of holding it at 0.
  bool relax_mu_beta = false;
};

// Per-dimension moment models.
struct KmModels {
  FunctionLibrary library;
  JumpMoments moments = JumpMoments::cumulant;
  double dt = 0.0;
  SindyModel m1, m2, m4, m6;
  std::optional<SindyModel> m3;
};

struct KmPrediction {
  double m1 = 0.0, m2 = 0.0, m4 = 0.0, m6 = 0.0;
  JumpDiffusionParams params;
  bool variance_floor = false;
  // lambda * dt was cut to kMaxRateTau; sigma_g^2 takes the remaining variance.
  bool rate_capped = false;
};

// x and g give the state and goal at the start of each increment of kms.
KmModels fit_km_models(const KMSeries& kms, const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                       const FunctionLibrary& library = FunctionLibrary{}, const SindyOptions& options = {});

KmPrediction predict_km(const KmModels& models, double x, double g);

struct SindyPrediction {
  MapPrediction map;
  JumpDiffusionParams params;
  bool variance_floor = false;
  // lambda * dt was cut to kMaxRateTau; sigma_g^2 takes the remaining variance.
  bool rate_capped = false;
};

// Evaluate the models at (x_s, g) and take the MAP of the implied transition
// density. Without a grid the default envelope grid is used.
SindyPrediction sindy_step(const KmModels& models, double x_s, double g, double tau,
                           const std::optional<StateGrid>& grid = std::nullopt);

nlohmann::json to_json(const SindyModel& model);
nlohmann::json to_json(const KmModels& models);
SindyModel sindy_model_from_json(const nlohmann::json& j);
KmModels km_models_from_json(const nlohmann::json& j);

}  // namespace psychic

#endif  // PSYCHIC_SINDY_HPP_
