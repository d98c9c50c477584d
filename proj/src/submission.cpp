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

#include "p804/submission.hpp"

#include "p804/error.hpp"

namespace p804 {

std::string_view to_string(ItemRole r) {
  switch (r) {
    case ItemRole::Rating: return "rating";
    case ItemRole::Gold: return "gold";
    case ItemRole::Trapping: return "trapping";
  }
  return "?";
}

ItemRole item_role_from_string(std::string_view s) {
  if (s == "rating") return ItemRole::Rating;
  if (s == "gold") return ItemRole::Gold;
  if (s == "trapping") return ItemRole::Trapping;
  fail("invalid-input", "unknown item role '" + std::string(s) + "'");
}

void to_json(Json& j, const SubmittedItem& i) {
  j = {{"clip_id", i.clip_id},
       {"role", std::string(to_string(i.role))},
       {"is_padding", i.is_padding},
       {"ratings", i.ratings}};
  if (i.model_id) j["model_id"] = *i.model_id;
  if (i.control_index) j["control_index"] = *i.control_index;
}

void from_json(const Json& j, SubmittedItem& i) {
  i.clip_id = j.at("clip_id").get<std::string>();
  i.role = item_role_from_string(j.at("role").get<std::string>());
  i.is_padding = j.value("is_padding", false);
  i.ratings = j.at("ratings").get<RatingVector>();
  i.model_id = j.contains("model_id") ? std::optional(j["model_id"].get<std::string>()) : std::nullopt;
  i.control_index = j.contains("control_index") ? std::optional(j["control_index"].get<std::size_t>()) : std::nullopt;
}

void to_json(Json& j, const Submission& s) {
  j = {{"submission_id", s.submission_id},
       {"participant_id", s.participant_id},
       {"package_id", s.package_id},
       {"session_id", s.session_id},
       {"started_at_ms", s.started_at.time_since_epoch().count()},
       {"submitted_at_ms", s.submitted_at.time_since_epoch().count()},
       {"scale_order", s.scale_order},
       {"certificates", s.certificates},
       {"controls", s.controls},
       {"items", s.items}};
}

void from_json(const Json& j, Submission& s) {
  s.submission_id = j.at("submission_id").get<std::string>();
  s.participant_id = j.at("participant_id").get<std::string>();
  s.package_id = j.at("package_id").get<std::string>();
  s.session_id = j.value("session_id", std::string{});
  s.started_at = Timestamp(std::chrono::milliseconds(j.value<std::int64_t>("started_at_ms", 0)));
  s.submitted_at = Timestamp(std::chrono::milliseconds(j.value<std::int64_t>("submitted_at_ms", 0)));
  const auto order = j.at("scale_order").get<std::vector<ScaleId>>();
  require(order.size() == kScaleCount, "invalid-input", "scale order must list seven scales");
  std::copy(order.begin(), order.end(), s.scale_order.begin());
  s.certificates = j.value("certificates", std::vector<Certificate>{});
  s.controls = j.at("controls").get<std::vector<ControlQuestion>>();
  s.items = j.at("items").get<std::vector<SubmittedItem>>();
}

}  // namespace p804
