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

#include "p804/packaging.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_set>

#include "p804/csv.hpp"
#include "p804/error.hpp"
#include "p804/random.hpp"

namespace p804 {

namespace {

// Draws without replacement, reshuffling once the pool is exhausted.
class CyclingPool {
 public:
  CyclingPool(const std::vector<ControlQuestion>& pool, Rng& rng) : pool_(pool), rng_(rng) {
    order_.resize(pool.size());
    refill();
  }

  const ControlQuestion& draw() {
    if (next_ == order_.size()) refill();
    return pool_[order_[next_++]];
  }

 private:
  void refill() {
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    rng_.shuffle(order_);
    next_ = 0;
  }

  const std::vector<ControlQuestion>& pool_;
  Rng& rng_;
  std::vector<std::size_t> order_;
  std::size_t next_ = 0;
};

std::string package_name(std::size_t index, std::size_t total) {
  const int width = std::max<int>(4, static_cast<int>(std::to_string(total).size()));
  std::string digits = std::to_string(index + 1);
  if (digits.size() < static_cast<std::size_t>(width)) digits.insert(0, width - digits.size(), '0');
  return "pkg_" + digits;
}

}  // namespace

std::array<ScaleId, kScaleCount> ScaleOrder::presentation() const {
  std::array<ScaleId, kScaleCount> out{};
  std::copy(permutation.begin(), permutation.end(), out.begin());
  out[kDimensionCount] = kFixedTail[0];
  out[kDimensionCount + 1] = kFixedTail[1];
  return out;
}

ScaleOrder assign_scale_order(const std::string& participant_id, std::uint64_t seed, std::uint64_t training_epoch) {
  Rng rng(derive_seed(derive_seed(seed, fnv1a(participant_id)), training_epoch));
  std::vector<ScaleId> dims(kDimensionScales.begin(), kDimensionScales.end());
  rng.shuffle(dims);
  ScaleOrder order;
  order.participant_id = participant_id;
  order.training_epoch = training_epoch;
  std::copy(dims.begin(), dims.end(), order.permutation.begin());
  return order;
}

std::vector<TestPackage> build_packages(const std::vector<Clip>& clips, const std::vector<ControlQuestion>& gold_pool,
                                        const std::vector<ControlQuestion>& trapping_pool, const StudyConfig& config,
                                        std::uint64_t seed) {
  require(!clips.empty(), "invalid-argument", "no clips to package");
  require(!gold_pool.empty(), "empty-pool", "gold question pool is empty");
  require(!trapping_pool.empty(), "empty-pool", "trapping question pool is empty");
  require(config.package_size > 0, "invalid-config", "package_size must be positive");

  std::unordered_set<std::string> ids;
  for (const auto& c : clips) {
    validate_clip(c);
    require(ids.insert(c.clip_id).second, "invalid-argument", "duplicate clip id '" + c.clip_id + "'");
  }
  for (const auto& q : gold_pool) {
    require(q.kind == ControlKind::Gold, "invalid-argument", "gold pool holds a non-gold question");
    validate_control(q);
  }
  for (const auto& q : trapping_pool) {
    require(q.kind == ControlKind::Trapping, "invalid-argument", "trapping pool holds a non-trapping question");
    validate_control(q);
  }

  Rng rng(seed);
  std::vector<std::size_t> order(clips.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  CyclingPool golds(gold_pool, rng);
  CyclingPool traps(trapping_pool, rng);

  const std::size_t size = config.package_size;
  const std::size_t count = (clips.size() + size - 1) / size;
  std::vector<TestPackage> packages;
  packages.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    TestPackage pkg;
    pkg.package_id = package_name(p, count);
    const std::size_t begin = p * size;
    const std::size_t end = std::min(begin + size, clips.size());
    for (std::size_t i = begin; i < end; ++i) {
      pkg.rating_clips.push_back(clips[order[i]]);
      pkg.padding.push_back(false);
    }
    // Padding repeats clips from earlier in the shuffled order, never one
    // already in this package when the pool is large enough.
    std::set<std::size_t> used(order.begin() + static_cast<std::ptrdiff_t>(begin),
                               order.begin() + static_cast<std::ptrdiff_t>(end));
    while (pkg.rating_clips.size() < size) {
      std::size_t pick = order[rng.below(order.size())];
      if (used.size() < clips.size()) {
        while (used.count(pick)) pick = order[rng.below(order.size())];
      }
      used.insert(pick);
      pkg.rating_clips.push_back(clips[pick]);
      pkg.padding.push_back(true);
    }

    pkg.controls = {golds.draw(), traps.draw()};
    std::vector<std::size_t> slots;
    for (std::size_t i = 1; i < pkg.item_count(); ++i) slots.push_back(i);
    rng.shuffle(slots);
    pkg.positions.assign(slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(kControlsPerPackage));
    packages.push_back(std::move(pkg));
  }
  return packages;
}

void export_task_list(const std::vector<TestPackage>& packages, std::ostream& out, std::size_t min_items) {
  std::size_t width = packages.empty() ? min_items : 0;
  for (const auto& p : packages) width = std::max(width, p.item_count());
  csv::Row header{"package_id"};
  for (std::size_t i = 0; i < width; ++i) header.push_back("item_" + std::to_string(i + 1));
  csv::write_row(out, header);
  for (const auto& p : packages) {
    csv::Row row{p.package_id};
    for (const auto& item : presentation_order(p)) row.push_back(item.clip->uri);
    row.resize(width + 1);
    csv::write_row(out, row);
  }
  if (!out) fail("io", "failed writing task list");
}

std::vector<TaskRow> parse_task_list(std::istream& in) {
  const auto table = csv::read_table(in);
  require(!table.header.empty() && table.header[0] == "package_id", "invalid-input",
          "task list must start with a package_id column");
  std::vector<TaskRow> rows;
  for (const auto& r : table.rows) {
    TaskRow row;
    row.package_id = r.at(0);
    for (std::size_t i = 1; i < r.size(); ++i) {
      if (!r[i].empty()) row.locators.push_back(r[i]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Clip> read_clip_manifest(std::istream& in) {
  const auto table = csv::read_table(in);
  const auto id = table.column("clip_id");
  const auto uri = table.column("uri");
  const auto duration = table.column("duration_s");
  const bool has_model = table.has_column("model_id");
  const bool has_source = table.has_column("source_id");
  std::vector<Clip> clips;
  for (const auto& r : table.rows) {
    require(r.size() == table.header.size(), "invalid-input", "clip manifest row has the wrong number of fields");
    Clip c;
    c.clip_id = r[id];
    c.uri = r[uri];
    try {
      c.duration_s = std::stod(r[duration]);
    } catch (const std::exception&) {
      fail("invalid-input", "clip '" + c.clip_id + "' has a non-numeric duration");
    }
    if (has_model && !r[table.column("model_id")].empty()) c.model_id = r[table.column("model_id")];
    if (has_source && !r[table.column("source_id")].empty()) c.source_id = r[table.column("source_id")];
    validate_clip(c);
    clips.push_back(std::move(c));
  }
  return clips;
}

std::vector<Clip> read_clip_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("io", "cannot open clip manifest " + path.string());
  return read_clip_manifest(in);
}

void write_clip_manifest(const std::vector<Clip>& clips, std::ostream& out) {
  csv::write_row(out, {"clip_id", "uri", "model_id", "source_id", "duration_s"});
  for (const auto& c : clips) {
    Json d = c.duration_s;
    csv::write_row(out, {c.clip_id, c.uri, c.model_id.value_or(""), c.source_id.value_or(""), d.dump()});
  }
}

void to_json(Json& j, const ScaleOrder& o) {
  j = {{"participant_id", o.participant_id}, {"training_epoch", o.training_epoch}, {"order", o.presentation()}};
}

void from_json(const Json& j, ScaleOrder& o) {
  o.participant_id = j.at("participant_id").get<std::string>();
  o.training_epoch = j.at("training_epoch").get<std::uint64_t>();
  const auto full = j.at("order").get<std::vector<ScaleId>>();
  require(full.size() == kScaleCount && full[5] == ScaleId::Signal && full[6] == ScaleId::Overall, "invalid-input",
          "scale order must list seven scales ending with Signal, Overall");
  std::copy(full.begin(), full.begin() + kDimensionCount, o.permutation.begin());
}

}  // namespace p804
