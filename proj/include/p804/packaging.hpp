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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "p804/domain.hpp"

namespace p804 {

/// Per-participant scale presentation order. The five dimension scales are
/// permuted; Signal and Overall always close the sequence.
struct ScaleOrder {
  std::string participant_id;
  std::array<ScaleId, kDimensionCount> permutation{};
  std::uint64_t training_epoch = 0;

  static constexpr std::array<ScaleId, 2> kFixedTail = {ScaleId::Signal, ScaleId::Overall};

  std::array<ScaleId, kScaleCount> presentation() const;
  bool operator==(const ScaleOrder&) const = default;
};

/// Deterministic in (participant_id, seed, training_epoch), uniform over the
/// 120 permutations.
ScaleOrder assign_scale_order(const std::string& participant_id, std::uint64_t seed, std::uint64_t training_epoch);

/// Splits `clips` into packages of config.package_size rating clips, each with
/// one gold and one trapping control at seeded positions other than 0. A short
/// final package is filled with repeated clips flagged as padding.
std::vector<TestPackage> build_packages(const std::vector<Clip>& clips, const std::vector<ControlQuestion>& gold_pool,
                                        const std::vector<ControlQuestion>& trapping_pool, const StudyConfig& config,
                                        std::uint64_t seed);

struct TaskRow {
  std::string package_id;
  std::vector<std::string> locators;

  bool operator==(const TaskRow&) const = default;
};

/// Comma-separated task list: `package_id,item_1,...,item_K` then one row per
/// package with stimulus locators in presentation order. K defaults to the
/// widest package (or `min_items` when there are none).
void export_task_list(const std::vector<TestPackage>& packages, std::ostream& out, std::size_t min_items = 12);
std::vector<TaskRow> parse_task_list(std::istream& in);

/// Clip manifest: CSV with columns clip_id, uri, duration_s and optional
/// model_id, source_id.
std::vector<Clip> read_clip_manifest(std::istream& in);
std::vector<Clip> read_clip_manifest(const std::filesystem::path& path);
void write_clip_manifest(const std::vector<Clip>& clips, std::ostream& out);

void to_json(Json& j, const ScaleOrder& o);
void from_json(const Json& j, ScaleOrder& o);

}  // namespace p804
