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

#include "p804/stats/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "p804/error.hpp"

namespace p804::stats {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "invalid-argument", "correlation inputs differ in length");
  require(x.size() >= 2, "invalid-argument", "correlation needs at least two observations");
}

// Merge sort by value counting the number of exchanges (inversions).
std::uint64_t sort_count_swaps(std::vector<double>& v, std::vector<double>& buffer, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = sort_count_swaps(v, buffer, lo, mid) + sort_count_swaps(v, buffer, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += mid - i;
      buffer[k++] = v[j++];
    } else {
      buffer[k++] = v[i++];
    }
  }
  while (i < mid) buffer[k++] = v[i++];
  while (j < hi) buffer[k++] = v[j++];
  std::copy(buffer.begin() + static_cast<std::ptrdiff_t>(lo), buffer.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

// Number of tied pairs in a sorted run-length sense.
template <class Eq>
std::uint64_t tied_pairs(std::size_t n, Eq equal) {
  std::uint64_t total = 0, run = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (equal(i - 1, i)) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total + run * (run - 1) / 2;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  require(sxx > 0.0 && syy > 0.0, "undefined-correlation", "correlation undefined for a zero-variance input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> midranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  return pearson(rx, ry);
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];

  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t n1 = tied_pairs(n, [&](std::size_t a, std::size_t b) { return x[idx[a]] == x[idx[b]]; });
  const std::uint64_t n3 = tied_pairs(n, [&](std::size_t a, std::size_t b) {
    return x[idx[a]] == x[idx[b]] && ys[a] == ys[b];
  });
  std::vector<double> buffer(n);
  const std::uint64_t swaps = sort_count_swaps(ys, buffer, 0, n);
  const std::uint64_t n2 = tied_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });

  require(n0 > n1 && n0 > n2, "all-tied", "tau-b undefined when an input is constant");
  // Concordant minus discordant pairs.
  const auto s = static_cast<double>(n0) - static_cast<double>(n1) - static_cast<double>(n2) +
                 static_cast<double>(n3) - 2.0 * static_cast<double>(swaps);
  return s / std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
}

std::vector<CorrectedRank> ci_corrected_ranking(std::vector<ModelScore> scores) {
  for (const auto& s : scores) {
    require(std::isfinite(s.ci95) && s.ci95 >= 0.0, "missing-ci", "model '" + s.model + "' lacks a confidence interval");
  }
  std::stable_sort(scores.begin(), scores.end(), [](const ModelScore& a, const ModelScore& b) {
    return a.mos > b.mos || (a.mos == b.mos && a.model < b.model);
  });
  std::vector<CorrectedRank> out;
  std::size_t rank = 0;
  const ModelScore* anchor = nullptr;
  for (const auto& s : scores) {
    if (anchor == nullptr || s.mos < anchor->mos - anchor->ci95) {
      anchor = &s;
      ++rank;
    }
    out.push_back({s.model, s.mos, rank});
  }
  return out;
}

TauB95Result tau_b95(const std::vector<ModelScore>& a, const std::vector<ModelScore>& b) {
  std::map<std::string, const ModelScore*> in_b;
  for (const auto& s : b) in_b[s.model] = &s;
  std::vector<ModelScore> shared_a, shared_b;
  for (const auto& s : a) {
    if (auto it = in_b.find(s.model); it != in_b.end()) {
      shared_a.push_back(s);
      shared_b.push_back(*it->second);
    }
  }
  require(shared_a.size() >= 2, "insufficient-overlap", "tau-b95 needs at least two shared models");

  TauB95Result result;
  result.ranking_a = ci_corrected_ranking(shared_a);
  result.ranking_b = ci_corrected_ranking(shared_b);
  std::map<std::string, double> rank_b;
  for (const auto& r : result.ranking_b) rank_b[r.model] = static_cast<double>(r.rank);
  std::vector<double> ra, rb;
  for (const auto& r : result.ranking_a) {
    ra.push_back(static_cast<double>(r.rank));
    rb.push_back(rank_b.at(r.model));
  }
  result.tau = kendall_tau_b(ra, rb);
  return result;
}

}  // namespace p804::stats
