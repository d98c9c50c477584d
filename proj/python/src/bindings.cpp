// Copyright 2026 The p804kit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "p804/domain.hpp"
#include "p804/error.hpp"
#include "p804/packaging.hpp"
#include "p804/quality_control.hpp"
#include "p804/stats/agreement.hpp"
#include "p804/stats/correlation.hpp"
#include "p804/stats/factor.hpp"
#include "p804/stats/mediation.hpp"
#include "p804/stimuli.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

using p804::Json;

// Structured values cross the boundary as JSON text; the Python wrapper does
// the dumps/loads.
std::string build_packages_json(const std::string& clips, const std::string& golds, const std::string& traps,
                                const std::string& config, std::uint64_t seed) {
  const auto packages = p804::build_packages(Json::parse(clips).get<std::vector<p804::Clip>>(),
                                             Json::parse(golds).get<std::vector<p804::ControlQuestion>>(),
                                             Json::parse(traps).get<std::vector<p804::ControlQuestion>>(),
                                             Json::parse(config).get<p804::StudyConfig>(), seed);
  return Json(packages).dump();
}

py::list aggregate(const std::vector<py::tuple>& rows, const std::string& level) {
  std::vector<p804::AcceptedVote> votes;
  votes.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.size() != 4) throw p804::Error("invalid-argument", "vote rows are (clip_id, model_id, scale, value)");
    p804::AcceptedVote v;
    v.clip_id = r[0].cast<std::string>();
    if (!r[1].is_none()) v.model_id = r[1].cast<std::string>();
    v.scale = p804::scale_from_string(r[2].cast<std::string>());
    v.value = r[3].cast<int>();
    votes.push_back(std::move(v));
  }
  py::list out;
  for (const auto& e : p804::aggregate_mos(votes, p804::mos_level_from_string(level))) {
    out.append(py::dict("key"_a = e.key, "scale"_a = std::string(p804::to_string(e.scale)), "mos"_a = e.mos,
                        "ci95"_a = e.ci95_halfwidth, "n"_a = e.n));
  }
  return out;
}

py::dict mediation(const Eigen::MatrixXd& values, const std::vector<std::string>& columns,
                   const std::vector<std::string>& predictors, const std::string& mediator, const std::string& outcome) {
  p804::stats::ScoreMatrix m;
  m.values = values;
  m.col_labels = columns;
  for (Eigen::Index i = 0; i < values.rows(); ++i) m.row_labels.push_back(std::to_string(i));
  const auto res = p804::stats::mediation(m, predictors, mediator, outcome);
  py::list effects;
  for (const auto& e : res.effects) {
    effects.append(py::dict("predictor"_a = e.predictor, "total"_a = e.total, "direct"_a = e.direct,
                            "indirect"_a = e.indirect, "a"_a = e.a, "b"_a = e.b));
  }
  return py::dict("mediator"_a = res.mediator, "outcome"_a = res.outcome, "n"_a = res.observations,
                  "effects"_a = effects);
}

std::vector<p804::stats::ModelScore> model_scores(const std::vector<std::tuple<std::string, double, double>>& rows) {
  std::vector<p804::stats::ModelScore> out;
  for (const auto& [model, mos, ci] : rows) out.push_back({model, mos, ci});
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-dimensional speech quality toolkit";

  static py::handle error = py::exception<p804::Error>(m, "P804Error", PyExc_ValueError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const p804::Error& e) {
      PyErr_SetString(error.ptr(), (e.code() + ": " + e.what()).c_str());
    }
  });

  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) { return p804::stats::pearson(x, y); });
  m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) { return p804::stats::spearman(x, y); });
  m.def("kendall_tau_b",
        [](const std::vector<double>& x, const std::vector<double>& y) { return p804::stats::kendall_tau_b(x, y); });

  m.def(
      "icc_k",
      [](const Eigen::MatrixXd& ratings, bool consistency) {
        return p804::stats::icc_k(ratings, consistency ? p804::stats::IccForm::Consistency
                                                       : p804::stats::IccForm::AbsoluteAgreement)
            .value;
      },
      "ratings"_a, "consistency"_a = false, "Average-measures ICC of a subjects x raters matrix.");

  m.def("corrected_ranking", [](const std::vector<std::tuple<std::string, double, double>>& rows) {
    std::vector<std::pair<std::string, std::size_t>> out;
    for (const auto& r : p804::stats::ci_corrected_ranking(model_scores(rows))) out.emplace_back(r.model, r.rank);
    return out;
  });
  m.def("tau_b95", [](const std::vector<std::tuple<std::string, double, double>>& a,
                      const std::vector<std::tuple<std::string, double, double>>& b) {
    return p804::stats::tau_b95(model_scores(a), model_scores(b)).tau;
  });

  m.def("correlation_matrix", &p804::stats::correlation_matrix);
  m.def("kmo", [](const Eigen::MatrixXd& r) { return p804::stats::kmo(r).overall; });
  m.def("bartlett", [](const Eigen::MatrixXd& r, std::size_t n) {
    const auto b = p804::stats::bartlett_sphericity(r, n);
    return py::make_tuple(b.chi2, b.df, b.p_value);
  });
  m.def(
      "efa",
      [](const Eigen::MatrixXd& r, int n_factors, bool rotate) {
        const auto sol = p804::stats::efa_ml(r, n_factors);
        return py::dict("loadings"_a = rotate ? p804::stats::varimax(sol.loadings).loadings : sol.loadings,
                        "uniquenesses"_a = sol.uniquenesses, "converged"_a = sol.converged,
                        "iterations"_a = sol.iterations, "heywood"_a = sol.heywood);
      },
      "r"_a, "n_factors"_a, "rotate"_a = true);
  m.def("varimax", [](const Eigen::MatrixXd& loadings) { return p804::stats::varimax(loadings).loadings; });
  m.def("mediation", &mediation, "values"_a, "columns"_a, "predictors"_a, "mediator"_a, "outcome"_a);

  m.def("aggregate_mos", &aggregate, "votes"_a, "level"_a = "clip");
  m.def("build_packages_json", &build_packages_json);

  m.def(
      "bandpass_noise",
      [](double low_hz, double high_hz, double duration_s, int sample_rate, std::uint64_t seed) {
        return p804::bandpass_noise({low_hz, high_hz}, duration_s, sample_rate, seed).samples;
      },
      "low_hz"_a, "high_hz"_a, "duration_s"_a, "sample_rate"_a = 48000, "seed"_a = 1);
}
