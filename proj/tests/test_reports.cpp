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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "p804/csv.hpp"
#include "p804/error.hpp"
#include "p804/stats/reproducibility.hpp"
#include "p804/stats/score_matrix.hpp"

using namespace p804;
using namespace p804::stats;

namespace {

// One vote per (model clip, scale, rater); model quality is shared across runs
// when `signal` > 0.
LabeledRun run(const std::string& label, std::uint64_t seed, double signal, int models = 20) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, 0.8);
  LabeledRun r{label, {}};
  for (int m = 0; m < models; ++m) {
    const double quality = 1.5 + 3.0 * m / (models - 1);
    for (int rater = 0; rater < 6; ++rater) {
      for (auto s : kAllScales) {
        const double v = signal * quality + (1 - signal) * 3.0 + noise(gen);
        const int vote = std::clamp(static_cast<int>(std::lround(v)), 1, 5);
        r.votes.push_back({"clip" + std::to_string(m), "model" + std::to_string(m), "r" + std::to_string(rater),
                           label, s, vote});
      }
    }
  }
  return r;
}

}  // namespace

TEST(Reproducibility, DuplicatedRunGivesOnes) {
  const auto a = run("run1", 1, 1.0);
  auto b = a;
  b.label = "run2";
  const auto report = reproducibility_report({a, b}, MosLevel::Clip);
  for (const auto& [scale, m] : report.matrices) EXPECT_NEAR(m(0, 1), 1.0, 1e-12);
}

TEST(Reproducibility, FiveRunsTenPairs) {
  std::vector<LabeledRun> runs;
  for (int i = 0; i < 5; ++i) runs.push_back(run("run" + std::to_string(i + 1), 10 + i, 1.0));
  for (auto level : {MosLevel::Clip, MosLevel::Model}) {
    const auto report = reproducibility_report(runs, level);
    ASSERT_EQ(report.pairs.size(), 7u);
    for (const auto& [scale, pairs] : report.pairs) {
      EXPECT_EQ(pairs.size(), 10u);
      for (const auto& p : pairs) EXPECT_GT(p.pearson, 0.5);
    }
    std::stringstream out;
    write_reproducibility_report(report, out);
    const auto table = csv::read_table(out);
    EXPECT_EQ(table.rows.size(), 35u);
    EXPECT_EQ(table.header.size(), 8u);
  }
}

TEST(Reproducibility, IndependentRunsWeaklyCorrelated) {
  std::vector<LabeledRun> runs;
  for (int i = 0; i < 5; ++i) runs.push_back(run("run" + std::to_string(i), 100 + i, 0.0));
  const auto report = reproducibility_report(runs, MosLevel::Model);
  double sum = 0;
  int count = 0;
  for (const auto& [scale, pairs] : report.pairs) {
    for (const auto& p : pairs) {
      sum += std::abs(p.pearson);
      ++count;
    }
  }
  EXPECT_LT(sum / count, 0.5);
}

TEST(Reproducibility, InsufficientOverlap) {
  auto a = run("a", 1, 1.0, 3);
  auto b = run("b", 2, 1.0, 3);
  for (auto& v : b.votes) v.clip_id += "_other";
  try {
    reproducibility_report({a, b}, MosLevel::Clip);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "insufficient-overlap");
  }
  EXPECT_THROW(reproducibility_report({a}, MosLevel::Clip), Error);
}

TEST(ScoreMatrix, PivotDropsIncompleteRows) {
  std::vector<MosEntry> entries;
  for (auto s : kAllScales) {
    entries.push_back({"full", s, 3.0, 0.1, 5});
    if (s != ScaleId::Loudness) entries.push_back({"partial", s, 2.0, 0.1, 5});
  }
  const auto m = pivot_scores(entries);
  EXPECT_EQ(m.row_labels, std::vector<std::string>{"full"});
  EXPECT_EQ(m.dropped_rows, 1u);
  EXPECT_EQ(m.values.cols(), 7);
  EXPECT_EQ(m.column("Overall"), 6);
  EXPECT_THROW(m.column("Bogus"), Error);

  std::stringstream ss;
  write_score_matrix(m, ss);
  const auto back = read_score_matrix(ss);
  EXPECT_EQ(back.row_labels, m.row_labels);
  EXPECT_EQ(back.col_labels, m.col_labels);
  EXPECT_EQ(back.values, m.values);
}

TEST(Csv, QuotingRoundTrip) {
  const csv::Row row{"plain", "with,comma", "with \"quote\"", "multi\nline", ""};
  std::stringstream ss;
  csv::write_row(ss, row);
  csv::Row back;
  ASSERT_TRUE(csv::read_row(ss, back));
  EXPECT_EQ(back, row);
  EXPECT_FALSE(csv::read_row(ss, back));
}
