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

#include "p804/stats/score_matrix.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>

#include "p804/csv.hpp"
#include "p804/error.hpp"

namespace p804::stats {

Eigen::Index ScoreMatrix::column(const std::string& label) const {
  auto it = std::find(col_labels.begin(), col_labels.end(), label);
  require(it != col_labels.end(), "invalid-argument", "no column '" + label + "'");
  return static_cast<Eigen::Index>(it - col_labels.begin());
}

ScoreMatrix pivot_scores(const std::vector<MosEntry>& entries, const std::vector<ScaleId>& scales) {
  std::map<std::string, std::map<ScaleId, double>> by_key;
  for (const auto& e : entries) by_key[e.key][e.scale] = e.mos;

  ScoreMatrix m;
  for (auto s : scales) m.col_labels.emplace_back(to_string(s));
  std::vector<std::vector<double>> rows;
  for (const auto& [key, values] : by_key) {
    if (!std::all_of(scales.begin(), scales.end(), [&](ScaleId s) { return values.count(s) != 0; })) {
      ++m.dropped_rows;
      continue;
    }
    m.row_labels.push_back(key);
    std::vector<double> row;
    for (auto s : scales) row.push_back(values.at(s));
    rows.push_back(std::move(row));
  }
  m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(scales.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < scales.size(); ++j) {
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void write_score_matrix(const ScoreMatrix& m, std::ostream& out) {
  csv::Row header{"key"};
  header.insert(header.end(), m.col_labels.begin(), m.col_labels.end());
  csv::write_row(out, header);
  char buf[64];
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    csv::Row row{m.row_labels[static_cast<std::size_t>(i)]};
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m.values(i, j));
      row.emplace_back(buf);
    }
    csv::write_row(out, row);
  }
}

ScoreMatrix read_score_matrix(std::istream& in) {
  const auto t = csv::read_table(in);
  require(t.header.size() >= 2, "invalid-input", "score table needs a key column and at least one variable");
  ScoreMatrix m;
  m.col_labels.assign(t.header.begin() + 1, t.header.end());
  m.values.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(m.col_labels.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    require(r.size() == t.header.size(), "invalid-input", "score table row has the wrong number of fields");
    m.row_labels.push_back(r[0]);
    for (std::size_t j = 1; j < r.size(); ++j) {
      try {
        m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j - 1)) = std::stod(r[j]);
      } catch (const std::exception&) {
        fail("invalid-input", "non-numeric score for '" + r[0] + "'");
      }
    }
  }
  return m;
}

}  // namespace p804::stats
