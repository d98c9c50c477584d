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

#include "p804/stats/reproducibility.hpp"

#include <cstdio>
#include <ostream>

#include "p804/csv.hpp"
#include "p804/error.hpp"
#include "p804/stats/correlation.hpp"

namespace p804::stats {

ReproducibilityReport reproducibility_report(const std::vector<LabeledRun>& runs, MosLevel level) {
  require(runs.size() >= 2, "invalid-argument", "reproducibility needs at least two runs");
  ReproducibilityReport report;
  report.level = level;

  // run -> scale -> key -> MOS
  std::vector<std::map<ScaleId, std::map<std::string, double>>> mos(runs.size());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    report.labels.push_back(runs[r].label);
    for (const auto& e : aggregate_mos(runs[r].votes, level)) mos[r][e.scale][e.key] = e.mos;
  }

  const auto n = static_cast<Eigen::Index>(runs.size());
  for (auto scale : kAllScales) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    std::vector<PairCorrelation> pairs;
    for (std::size_t a = 0; a < runs.size(); ++a) {
      for (std::size_t b = a + 1; b < runs.size(); ++b) {
        std::vector<double> xa, xb;
        for (const auto& [key, value] : mos[a][scale]) {
          if (auto it = mos[b][scale].find(key); it != mos[b][scale].end()) {
            xa.push_back(value);
            xb.push_back(it->second);
          }
        }
        require(xa.size() >= 2, "insufficient-overlap",
                "runs '" + runs[a].label + "' and '" + runs[b].label + "' share fewer than two keys on " +
                    std::string(to_string(scale)));
        const double r = pearson(xa, xb);
        m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = r;
        m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = r;
        pairs.push_back({a, b, r, xa.size()});
      }
    }
    report.matrices[scale] = m;
    report.pairs[scale] = std::move(pairs);
  }
  return report;
}

void write_reproducibility_report(const ReproducibilityReport& report, std::ostream& out) {
  csv::Row header{"level", "scale", "run"};
  header.insert(header.end(), report.labels.begin(), report.labels.end());
  csv::write_row(out, header);
  char buf[32];
  for (const auto& [scale, m] : report.matrices) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      csv::Row row{std::string(to_string(report.level)), std::string(to_string(scale)),
                   report.labels[static_cast<std::size_t>(i)]};
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        std::snprintf(buf, sizeof buf, "%.3f", m(i, j));
        row.emplace_back(buf);
      }
      csv::write_row(out, row);
    }
  }
}

}  // namespace p804::stats
