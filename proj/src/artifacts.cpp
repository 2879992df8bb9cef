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

#include "psychic/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "psychic/error.hpp"
#include "psychic/goal_engine.hpp"
#include "psychic/serialization.hpp"

namespace psychic {

namespace {

nlohmann::json params_json(const JumpDiffusionParams& p) {
  return {{"mu_g", p.mu_g},
          {"sigma_g", p.sigma_g},
          {"lambda", p.lambda},
          {"mu_beta", p.mu_beta},
          {"sigma_beta", p.sigma_beta}};
}

JumpDiffusionParams params_from_json(const nlohmann::json& j) {
  return {j.at("mu_g").get<double>(), j.at("sigma_g").get<double>(), j.at("lambda").get<double>(),
          j.at("mu_beta").get<double>(), j.at("sigma_beta").get<double>()};
}

void write_row(std::ostream& out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ',';
    out << format_double(values[i]);
  }
  out << '\n';
}

}  // namespace

std::string axis_name(Index dim) {
  static const char* kNames[] = {"x", "y", "z"};
  return dim < 3 ? kNames[dim] : "x" + std::to_string(dim);
}

nlohmann::json nll_model_json(const NllModel& model, const GoalSet& goals, double dt, int starts) {
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t k = 0; k < model.params.size(); ++k) {
    nlohmann::json dims = nlohmann::json::array();
    for (std::size_t d = 0; d < model.params[k].size(); ++d) {
      nlohmann::json e = {{"dim", d}, {"params", params_json(model.params[k][d])}};
      if (k < model.fits.size() && d < model.fits[k].size()) {
        const NllFitResult& f = model.fits[k][d];
        e["fit"] = {{"objective", f.objective},
                    {"jump_model", f.jump_model},
                    {"full_params", params_json(f.full_params)},
                    {"full_objective", f.full_objective},
                    {"start_objectives", f.start_objectives},
                    {"starts", starts},
                    {"evaluations", f.evaluations},
                    {"iterations", f.iterations},
                    {"transitions", f.transitions},
                    {"floor_hit", f.floor_hit}};
      }
      dims.push_back(e);
    }
    const std::string label = goals.empty() ? "pooled" : goals[static_cast<Index>(k)].label;
    entries.push_back({{"label", label}, {"dims", dims}});
  }
  return {{"kind", "nll"}, {"dt", dt}, {"fallbacks", model.fallbacks}, {"goals", entries}};
}

nlohmann::json sindy_model_json(const std::vector<KmModels>& models, const std::string& library, double dt) {
  nlohmann::json dims = nlohmann::json::array();
  for (const KmModels& m : models) dims.push_back(to_json(m));
  return {{"kind", "sindy"}, {"dt", dt}, {"library", library}, {"dims", dims}};
}

ModelFile model_from_json(const nlohmann::json& j) {
  ModelFile m;
  try {
    const std::string kind = j.at("kind").get<std::string>();
    m.dt = j.at("dt").get<double>();
    if (kind == "nll") {
      m.kind = ModelKind::nll;
      for (const auto& g : j.at("goals")) {
        m.labels.push_back(g.at("label").get<std::string>());
        std::vector<JumpDiffusionParams> per_dim;
        for (const auto& d : g.at("dims")) per_dim.push_back(params_from_json(d.at("params")));
        m.nll.push_back(std::move(per_dim));
      }
      if (m.nll.empty()) throw Error("model file: no parameter sets");
      m.dims = static_cast<Index>(m.nll.front().size());
      for (const auto& p : m.nll) {
        if (static_cast<Index>(p.size()) != m.dims) throw Error("model file: goals disagree on dimension count");
      }
    } else if (kind == "sindy") {
      m.kind = ModelKind::sindy;
      for (const auto& d : j.at("dims")) m.sindy.push_back(km_models_from_json(d));
      m.dims = static_cast<Index>(m.sindy.size());
    } else {
      throw Error("model file: unknown kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("model file: ") + e.what());
  }
  if (m.dims < 1) throw Error("model file: no dimensions");
  if (!(m.dt > 0.0)) throw Error("model file: dt must be positive");
  return m;
}

ModelFile load_model_file(const std::string& path) { return model_from_json(read_json_file(path)); }

ReachParams model_params(const ModelFile& model, const Eigen::VectorXd& x_s, const GoalSet& goals) {
  if (x_s.size() != model.dims) {
    throw Error("x0 has " + std::to_string(x_s.size()) + " coordinates, model has " + std::to_string(model.dims));
  }
  if (!goals.empty() && goals.dims() != model.dims) throw Error("goal dimension does not match the model");
  if (model.kind == ModelKind::nll) return model.nll;
  ReachParams out;
  const Index k_count = goals.empty() ? 1 : goals.size();
  for (Index k = 0; k < k_count; ++k) {
    std::vector<JumpDiffusionParams> per_dim;
    for (Index d = 0; d < model.dims; ++d) {
      const double g = goals.empty() ? x_s(d) : goals[k].position(d);
      per_dim.push_back(predict_km(model.sindy[static_cast<std::size_t>(d)], x_s(d), g).params);
    }
    out.push_back(std::move(per_dim));
  }
  return out;
}

void write_km_csv(std::ostream& out, const KMSeries& kms, double t0, const std::string& metadata) {
  out << metadata << '\n' << "t,M1,M2,M4,M6,sigma_beta_sq,lambda,sigma_g_sq\n";
  for (Index i = 0; i < kms.size(); ++i) {
    auto at = [&](const Eigen::VectorXd& v) { return v.size() > i ? v(i) : 0.0; };
    write_row(out, {t0 + kms.dt * static_cast<double>(i), kms.m1(i), kms.m2(i), kms.m4(i), kms.m6(i),
                    at(kms.sigma_beta_sq), at(kms.lambda), at(kms.sigma_g_sq)});
  }
}

KMSeries read_km_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  const std::vector<double> t = table.numeric_column("t");
  if (t.size() < 2) throw Error("km table: need at least two rows");
  auto col = [&](const char* name) {
    const std::vector<double> v = table.numeric_column(name);
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size())));
  };
  KMSeries kms;
  kms.dt = t[1] - t[0];
  if (!(kms.dt > 0.0)) throw Error("km table: times must increase");
  kms.m1 = col("M1");
  kms.m2 = col("M2");
  kms.m4 = col("M4");
  kms.m6 = col("M6");
  const Index n = kms.m1.size();
  kms.sigma_beta_sq = table.column("sigma_beta_sq") >= 0 ? col("sigma_beta_sq") : Eigen::VectorXd::Zero(n);
  kms.lambda = table.column("lambda") >= 0 ? col("lambda") : Eigen::VectorXd::Zero(n);
  kms.sigma_g_sq = table.column("sigma_g_sq") >= 0 ? col("sigma_g_sq") : Eigen::VectorXd::Zero(n);
  return kms;
}

void write_goal_trace_csv(std::ostream& out, const Trajectory& traj, const GoalTrace& trace,
                          const std::string& metadata) {
  const Index n = traj.size();
  const Index dims = traj.dims();
  if (trace.g.rows() != n || trace.g.cols() != dims) throw Error("goal trace does not match the trajectory");
  std::vector<int> switched(static_cast<std::size_t>(n), 0);
  for (const SwitchEvent& s : trace.switches) {
    if (s.step >= 0 && s.step < n) switched[static_cast<std::size_t>(s.step)] = 1;
  }
  out << metadata << "\nt";
  for (Index d = 0; d < dims; ++d) out << ",g_" << axis_name(d);
  out << ",S_settled,S_move,S_jump,switch\n";
  const GoalScores& sc = trace.scores;
  for (Index i = 0; i < n; ++i) {
    std::vector<double> row = {traj.times()(i)};
    for (Index d = 0; d < dims; ++d) row.push_back(trace.g(i, d));
    double settled = 0.0, move = 0.0;
    int jump = 0;
    if (sc.steps() > 0) {
      const Index s = std::min(i, sc.steps() - 1);
      settled = sc.settled.row(s).mean();
      move = sc.move.row(s).mean();
      jump = sc.jump.row(s).maxCoeff() > 0 ? 1 : 0;
    }
    row.push_back(settled);
    row.push_back(move);
    row.push_back(jump);
    row.push_back(switched[static_cast<std::size_t>(i)]);
    write_row(out, row);
  }
}

GoalTraceTable read_goal_trace_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  GoalTraceTable out;
  const std::vector<double> t = table.numeric_column("t");
  const Index n = static_cast<Index>(t.size());
  out.t = Eigen::Map<const Eigen::VectorXd>(t.data(), n);
  Index dims = 0;
  while (table.column("g_" + axis_name(dims)) >= 0) ++dims;
  if (dims == 0) throw Error("goal trace: no g_x column");
  out.g.resize(n, dims);
  for (Index d = 0; d < dims; ++d) {
    const std::vector<double> v = table.numeric_column("g_" + axis_name(d));
    out.g.col(d) = Eigen::Map<const Eigen::VectorXd>(v.data(), n);
  }
  auto opt = [&](const char* name) {
    if (table.column(name) < 0) return Eigen::VectorXd(Eigen::VectorXd::Zero(n));
    const std::vector<double> v = table.numeric_column(name);
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), n));
  };
  out.settled = opt("S_settled");
  out.move = opt("S_move");
  out.jump = opt("S_jump").cast<int>();
  out.switched = opt("switch").cast<int>();
  return out;
}

GoalTraceTable read_goal_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open goal trace '" + path + "'");
  return read_goal_trace_csv(in);
}

std::vector<int> read_labels_csv(std::istream& in, const GoalSet& goals) {
  const CsvTable table = read_csv(in);
  const int c = table.column("label");
  if (c < 0) throw Error("labels: missing column 'label'");
  std::vector<int> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& cell = table.rows[r][static_cast<std::size_t>(c)];
    int idx = -1;
    for (Index k = 0; k < goals.size(); ++k) {
      if (goals[k].label == cell) idx = static_cast<int>(k);
    }
    double v = 0.0;
    if (idx < 0 && parse_double(cell, v) && v == std::floor(v) && v < static_cast<double>(goals.size())) {
      idx = static_cast<int>(v);
    }
    if (idx < 0 && !(parse_double(cell, v) && v < 0.0)) {
      throw ParseError("labels: unknown goal '" + cell + "'", r + 2);
    }
    out.push_back(idx);
  }
  return out;
}

void write_reach_csv(std::ostream& out, const ReachabilityGrid& grid, const std::string& metadata) {
  const Index dims = grid.spec.dims();
  out << metadata << "\nt";
  for (Index d = 0; d < dims; ++d) out << ',' << axis_name(d);
  out << ",logp\n";
  const Index voxels = grid.spec.voxels();
  auto emit = [&](const std::string& t, const Eigen::ArrayXd& values) {
    for (Index v = 0; v < voxels; ++v) {
      const std::vector<Index> idx = grid.unravel(v);
      out << t;
      for (Index d = 0; d < dims; ++d) {
        out << ',' << format_double(grid.spec.axes[static_cast<std::size_t>(d)].point(idx[static_cast<std::size_t>(d)]));
      }
      out << ',' << format_double(values(v)) << '\n';
    }
  };
  for (std::size_t s = 0; s < grid.slices.size(); ++s) emit(format_double(grid.spec.slices[s]), grid.slices[s]);
  emit("collapsed", grid.collapsed);
}

void write_pdf_curve_csv(std::ostream& out, const std::vector<PdfCurve>& curves, double x_s, double tau,
                         Index points, const std::string& metadata) {
  if (curves.empty()) throw Error("pdf-curve: no models");
  if (points < 3) throw Error("pdf-curve: need at least 3 points");
  double lo = x_s, hi = x_s;
  for (const PdfCurve& c : curves) {
    const double centre = x_s + c.params.mean_displacement(tau);
    const double half = 1.5 * map_envelope(c.params, tau);
    lo = std::min(lo, centre - half);
    hi = std::max(hi, centre + half);
  }
  const StateGrid grid{lo, hi, points};
  out << metadata << "\nmodel,x,pdf,logp\n";
  for (const PdfCurve& c : curves) {
    const TransitionDensity<double> density(c.params, tau);
    for (Index i = 0; i < points; ++i) {
      const double x = grid.point(i);
      const double lp = density.log_pdf(x - x_s);
      out << c.name << ',' << format_double(x) << ',' << format_double(std::exp(lp)) << ',' << format_double(lp)
          << '\n';
    }
  }
}

void write_jump_markers_csv(std::ostream& out, const std::vector<KMSeries>& raw, double t0, Index window,
                            double contamination, const std::string& metadata) {
  out << metadata << "\nt,dim,step\n";
  for (std::size_t d = 0; d < raw.size(); ++d) {
    const Eigen::VectorXi flags = ecod_jump_outliers(jump_features(raw[d], window), contamination);
    for (Index i = 0; i < flags.size(); ++i) {
      if (flags(i)) out << format_double(t0 + raw[d].dt * static_cast<double>(i)) << ',' << d << ',' << i << '\n';
    }
  }
}

void write_reach_slice_csv(std::ostream& out, const SliceExport& slice, const std::string& metadata) {
  out << metadata << '\n' << axis_name(slice.dim_a) << ',' << axis_name(slice.dim_b) << ",logp\n";
  for (Index a = 0; a < slice.axis_a.size(); ++a) {
    for (Index b = 0; b < slice.axis_b.size(); ++b) {
      write_row(out, {slice.axis_a(a), slice.axis_b(b), slice.values(a, b)});
    }
  }
}

}  // namespace psychic
