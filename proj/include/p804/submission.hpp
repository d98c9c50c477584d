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
#include <optional>
#include <string>
#include <vector>

#include "p804/domain.hpp"

namespace p804 {

struct SubmittedItem {
  std::string clip_id;
  std::optional<std::string> model_id;
  ItemRole role = ItemRole::Rating;
  bool is_padding = false;
  /// Index into Submission::controls for gold/trapping items.
  std::optional<std::size_t> control_index;
  RatingVector ratings;

  bool operator==(const SubmittedItem&) const = default;
};

/// One participant's answers for one package, as persisted in the vote log.
struct Submission {
  std::string submission_id;
  std::string participant_id;
  std::string package_id;
  std::string session_id;
  Timestamp started_at{};
  Timestamp submitted_at{};
  std::array<ScaleId, kScaleCount> scale_order = kAllScales;
  std::vector<Certificate> certificates;
  /// Snapshot of the package's control questions.
  std::vector<ControlQuestion> controls;
  std::vector<SubmittedItem> items;

  bool operator==(const Submission&) const = default;
};

std::string_view to_string(ItemRole r);
ItemRole item_role_from_string(std::string_view s);

void to_json(Json& j, const SubmittedItem& i);
void from_json(const Json& j, SubmittedItem& i);
void to_json(Json& j, const Submission& s);
void from_json(const Json& j, Submission& s);

}  // namespace p804
