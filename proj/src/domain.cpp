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

#include "p804/domain.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "p804/error.hpp"

namespace p804 {

namespace {

constexpr std::array<std::string_view, kScaleCount> kScaleNames = {
    "Noisiness", "Coloration", "Discontinuity", "Loudness", "Reverberation", "Signal", "Overall"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

Json scale_map_json(const std::map<ScaleId, Expectation>& m) {
  Json out = Json::object();
  for (const auto& [scale, e] : m) {
    out[std::string(to_string(scale))] = {{"value", e.value}, {"tolerance", e.tolerance}};
  }
  return out;
}

}  // namespace

std::string_view to_string(ScaleId s) { return kScaleNames.at(scale_index(s)); }

std::optional<ScaleId> parse_scale(std::string_view name) {
  for (std::size_t i = 0; i < kScaleNames.size(); ++i) {
    if (iequals(name, kScaleNames[i])) return kAllScales[i];
  }
  return std::nullopt;
}

ScaleId scale_from_string(std::string_view name) {
  auto s = parse_scale(name);
  if (!s) fail("invalid-argument", "unknown scale '" + std::string(name) + "'");
  return *s;
}

RatingVector RatingVector::uniform(int value) {
  RatingVector rv;
  for (auto s : kAllScales) rv.set(s, value);
  return rv;
}

std::optional<int> RatingVector::get(ScaleId scale) const {
  auto it = votes_.find(scale);
  if (it == votes_.end()) return std::nullopt;
  return it->second;
}

int RatingVector::at(ScaleId scale) const {
  auto v = get(scale);
  if (!v) fail("incomplete-votes", "no vote on scale " + std::string(to_string(scale)));
  return *v;
}

RatingValidation validate_rating_vector(const RatingVector& rv) {
  RatingValidation out;
  for (auto s : kAllScales) {
    auto v = rv.get(s);
    if (!v) {
      out.missing.push_back(s);
    } else if (Vote vote{s, *v}; !vote.in_range()) {
      out.invalid.push_back(vote);
    }
  }
  return out;
}

void validate_clip(const Clip& clip) {
  require(!clip.clip_id.empty(), "invalid-argument", "clip id is empty");
  require(clip.duration_s > 0.0, "invalid-argument",
          "clip '" + clip.clip_id + "' must have a positive duration");
}

std::string_view to_string(ControlKind k) { return k == ControlKind::Gold ? "gold" : "trapping"; }

ControlKind control_kind_from_string(std::string_view name) {
  if (iequals(name, "gold")) return ControlKind::Gold;
  if (iequals(name, "trapping")) return ControlKind::Trapping;
  fail("invalid-argument", "unknown control kind '" + std::string(name) + "'");
}

ControlQuestion ControlQuestion::trapping(Clip clip, Extreme extreme) {
  ControlQuestion q;
  q.kind = ControlKind::Trapping;
  q.clip = std::move(clip);
  for (auto s : kAllScales) q.expected[s] = Expectation{extreme_value(extreme), 0};
  return q;
}

void validate_control(const ControlQuestion& control) {
  validate_clip(control.clip);
  for (const auto& [scale, e] : control.expected) {
    require(e.value == kMinVote || e.value == kMaxVote, "invalid-argument",
            "control '" + control.clip.clip_id + "' expects a non-extreme value on " +
                std::string(to_string(scale)));
    require(e.tolerance >= 0, "invalid-argument", "negative control tolerance");
  }
  if (control.kind == ControlKind::Trapping) {
    require(control.expected.size() == kScaleCount, "invalid-argument",
            "trapping control '" + control.clip.clip_id + "' must cover all seven scales");
    const int first = control.expected.begin()->second.value;
    for (const auto& [scale, e] : control.expected) {
      require(e.value == first, "invalid-argument",
              "trapping control '" + control.clip.clip_id + "' mixes extremes");
    }
  }
}

std::vector<PresentedItem> presentation_order(const TestPackage& package) {
  const std::size_t total = package.item_count();
  std::vector<PresentedItem> out(total);
  std::vector<bool> taken(total, false);
  for (std::size_t c = 0; c < package.controls.size(); ++c) {
    const std::size_t pos = package.positions.at(c);
    require(pos < total && !taken[pos], "invalid-argument", "bad control position in package " + package.package_id);
    taken[pos] = true;
    const auto& q = package.controls[c];
    out[pos] = PresentedItem{&q.clip, q.kind == ControlKind::Gold ? ItemRole::Gold : ItemRole::Trapping, false, c};
  }
  std::size_t next = 0;
  for (std::size_t i = 0; i < total; ++i) {
    if (taken[i]) continue;
    const bool pad = next < package.padding.size() && package.padding[next];
    out[i] = PresentedItem{&package.rating_clips.at(next), ItemRole::Rating, pad, std::nullopt};
    ++next;
  }
  return out;
}

void validate_package(const TestPackage& package, std::size_t package_size) {
  const std::string& id = package.package_id;
  require(!id.empty(), "invalid-argument", "package id is empty");
  require(package.rating_clips.size() == package_size, "invalid-argument",
          "package " + id + " must hold exactly " + std::to_string(package_size) + " rating clips");
  require(package.padding.size() == package.rating_clips.size(), "invalid-argument",
          "package " + id + " padding flags do not match rating clips");
  require(package.controls.size() == kControlsPerPackage, "invalid-argument",
          "package " + id + " must hold exactly two control questions");
  require(package.positions.size() == package.controls.size(), "invalid-argument",
          "package " + id + " needs one position per control");
  std::set<std::size_t> seen;
  for (auto pos : package.positions) {
    require(pos > 0 && pos < package.item_count(), "invalid-argument",
            "package " + id + " has a control at an invalid position");
    require(seen.insert(pos).second, "invalid-argument", "package " + id + " repeats a control position");
  }
  for (const auto& c : package.rating_clips) validate_clip(c);
  for (const auto& q : package.controls) validate_control(q);
}

std::string_view to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::Qualification: return "qualification";
    case CertificateKind::Environment: return "environment";
    case CertificateKind::Training: return "training";
  }
  return "?";
}

CertificateKind certificate_kind_from_string(std::string_view name) {
  for (auto k : {CertificateKind::Qualification, CertificateKind::Environment, CertificateKind::Training}) {
    if (iequals(name, to_string(k))) return k;
  }
  fail("invalid-argument", "unknown certificate kind '" + std::string(name) + "'");
}

bool Certificate::valid_at(Timestamp now) const {
  if (!ttl) return true;
  return now - issued_at < std::chrono::duration_cast<std::chrono::milliseconds>(*ttl);
}

std::optional<Timestamp> Certificate::expires_at() const {
  if (!ttl) return std::nullopt;
  return issued_at + std::chrono::duration_cast<std::chrono::milliseconds>(*ttl);
}

std::string_view to_string(Bandwidth b) {
  switch (b) {
    case Bandwidth::NB: return "NB";
    case Bandwidth::WB: return "WB";
    case Bandwidth::SWB: return "SWB";
    case Bandwidth::FB: return "FB";
  }
  return "?";
}

Bandwidth bandwidth_from_string(std::string_view name) {
  for (auto b : {Bandwidth::NB, Bandwidth::WB, Bandwidth::SWB, Bandwidth::FB}) {
    if (iequals(name, to_string(b))) return b;
  }
  fail("invalid-argument", "unknown bandwidth class '" + std::string(name) + "'");
}

void validate_study_config(const StudyConfig& c) {
  require(c.package_size > 0, "invalid-config", "package_size must be positive");
  require(c.gold_tolerance >= 0, "invalid-config", "gold_tolerance must be non-negative");
  require(c.feedback_tolerance >= 0, "invalid-config", "feedback_tolerance must be non-negative");
  require(c.training_clip_count > 0, "invalid-config", "training_clip_count must be positive");
  require(c.jnd_question_count > 0, "invalid-config", "jnd_question_count must be positive");
  require(c.jnd_pass_threshold > 0 && c.jnd_pass_threshold <= c.jnd_question_count, "invalid-config",
          "jnd_pass_threshold must lie in [1, jnd_question_count]");
  require(c.hearing_pass_fraction > 0.0 && c.hearing_pass_fraction <= 1.0, "invalid-config",
          "hearing_pass_fraction must lie in (0, 1]");
  require(c.playback_tolerance_s >= 0.0, "invalid-config", "playback_tolerance_s must be non-negative");
  require(c.ttls.environment.count() > 0 && c.ttls.training.count() > 0, "invalid-config",
          "certificate TTLs must be positive");
  if (c.worker_rejection_threshold) {
    require(*c.worker_rejection_threshold >= 0.0 && *c.worker_rejection_threshold <= 1.0, "invalid-config",
            "worker_rejection_threshold must lie in [0, 1]");
  }
  std::set<ScaleId> seen;
  for (const auto& d : c.scales) {
    require(seen.insert(d.scale).second, "invalid-config",
            "scale " + std::string(to_string(d.scale)) + " described twice");
  }
}

std::optional<Seconds> ttl_for(const StudyConfig& config, CertificateKind kind) {
  switch (kind) {
    case CertificateKind::Qualification: return config.ttls.qualification;
    case CertificateKind::Environment: return config.ttls.environment;
    case CertificateKind::Training: return config.ttls.training;
  }
  return std::nullopt;
}

StudyConfig load_study_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("missing-config", "cannot open config " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    fail("invalid-config", "cannot parse " + path.string() + ": " + e.what());
  }
  StudyConfig c;
  try {
    c = j.get<StudyConfig>();
  } catch (const Json::exception& e) {
    fail("invalid-config", path.string() + ": " + e.what());
  }
  validate_study_config(c);
  return c;
}

// ---------------------------------------------------------------------------

void to_json(Json& j, ScaleId s) { j = std::string(to_string(s)); }
void from_json(const Json& j, ScaleId& s) { s = scale_from_string(j.get<std::string>()); }

void to_json(Json& j, const ScaleDescriptor& d) {
  j = {{"scale", d.scale},
       {"low_label", d.low_label},
       {"high_label", d.high_label},
       {"adjectives_low", d.adjectives_low},
       {"adjectives_high", d.adjectives_high}};
}

void from_json(const Json& j, ScaleDescriptor& d) {
  d.scale = j.at("scale").get<ScaleId>();
  d.low_label = j.at("low_label").get<std::string>();
  d.high_label = j.at("high_label").get<std::string>();
  auto adjectives = [&](const char* key) {
    const auto v = j.at(key).get<std::vector<std::string>>();
    require(v.size() == 3, "invalid-config",
            std::string(key) + " of " + std::string(to_string(d.scale)) + " must list exactly three adjectives");
    return std::array<std::string, 3>{v[0], v[1], v[2]};
  };
  d.adjectives_low = adjectives("adjectives_low");
  d.adjectives_high = adjectives("adjectives_high");
}

void to_json(Json& j, const RatingVector& rv) {
  j = Json::object();
  for (const auto& [scale, value] : rv.votes()) j[std::string(to_string(scale))] = value;
}

void from_json(const Json& j, RatingVector& rv) {
  rv = RatingVector{};
  for (const auto& [key, value] : j.items()) rv.set(scale_from_string(key), value.get<int>());
}

void to_json(Json& j, const Clip& c) {
  j = {{"clip_id", c.clip_id}, {"uri", c.uri}, {"duration_s", c.duration_s}};
  if (c.model_id) j["model_id"] = *c.model_id;
  if (c.source_id) j["source_id"] = *c.source_id;
}

void from_json(const Json& j, Clip& c) {
  c.clip_id = j.at("clip_id").get<std::string>();
  c.uri = j.value("uri", std::string{});
  c.duration_s = j.at("duration_s").get<double>();
  c.model_id = j.contains("model_id") ? std::optional(j["model_id"].get<std::string>()) : std::nullopt;
  c.source_id = j.contains("source_id") ? std::optional(j["source_id"].get<std::string>()) : std::nullopt;
}

void to_json(Json& j, const ControlQuestion& q) {
  j = {{"kind", std::string(to_string(q.kind))}, {"clip", q.clip}, {"expected", scale_map_json(q.expected)}};
}

void from_json(const Json& j, ControlQuestion& q) {
  q.kind = control_kind_from_string(j.at("kind").get<std::string>());
  q.clip = j.at("clip").get<Clip>();
  q.expected.clear();
  for (const auto& [key, e] : j.at("expected").items()) {
    q.expected[scale_from_string(key)] = Expectation{e.at("value").get<int>(), e.value("tolerance", 0)};
  }
}

void to_json(Json& j, const TestPackage& p) {
  j = {{"package_id", p.package_id},
       {"rating_clips", p.rating_clips},
       {"padding", p.padding},
       {"controls", p.controls},
       {"positions", p.positions}};
}

void from_json(const Json& j, TestPackage& p) {
  p.package_id = j.at("package_id").get<std::string>();
  p.rating_clips = j.at("rating_clips").get<std::vector<Clip>>();
  p.padding = j.contains("padding") ? j["padding"].get<std::vector<bool>>()
                                    : std::vector<bool>(p.rating_clips.size(), false);
  p.controls = j.at("controls").get<std::vector<ControlQuestion>>();
  p.positions = j.at("positions").get<std::vector<std::size_t>>();
}

void to_json(Json& j, const Certificate& c) {
  j = {{"kind", std::string(to_string(c.kind))},
       {"participant_id", c.participant_id},
       {"issued_at_ms", c.issued_at.time_since_epoch().count()},
       {"ttl_s", c.ttl ? Json(c.ttl->count()) : Json(nullptr)}};
}

void from_json(const Json& j, Certificate& c) {
  c.kind = certificate_kind_from_string(j.at("kind").get<std::string>());
  c.participant_id = j.at("participant_id").get<std::string>();
  c.issued_at = Timestamp(std::chrono::milliseconds(j.at("issued_at_ms").get<std::int64_t>()));
  const auto& ttl = j.at("ttl_s");
  c.ttl = ttl.is_null() ? std::nullopt : std::optional(Seconds(ttl.get<std::int64_t>()));
}

void to_json(Json& j, const StudyConfig& c) {
  j = {{"package_size", c.package_size},
       {"required_bandwidth", std::string(to_string(c.required_bandwidth))},
       {"gold_tolerance", c.gold_tolerance},
       {"training_clip_count", c.training_clip_count},
       {"jnd_question_count", c.jnd_question_count},
       {"jnd_pass_threshold", c.jnd_pass_threshold},
       {"hearing_pass_fraction", c.hearing_pass_fraction},
       {"feedback_tolerance", c.feedback_tolerance},
       {"playback_tolerance_s", c.playback_tolerance_s},
       {"certificate_ttls",
        {{"qualification_s", c.ttls.qualification ? Json(c.ttls.qualification->count()) : Json(nullptr)},
         {"environment_s", c.ttls.environment.count()},
         {"training_s", c.ttls.training.count()}}},
       {"random_seed", c.random_seed},
       {"worker_rejection_threshold",
        c.worker_rejection_threshold ? Json(*c.worker_rejection_threshold) : Json(nullptr)},
       {"scales", c.scales}};
}

// Missing keys keep their defaults so a config file only lists what it changes.
void from_json(const Json& j, StudyConfig& c) {
  static const std::set<std::string> known = {
      "package_size",       "required_bandwidth", "gold_tolerance",       "training_clip_count",
      "jnd_question_count", "jnd_pass_threshold", "hearing_pass_fraction", "feedback_tolerance",
      "playback_tolerance_s", "certificate_ttls", "random_seed",          "worker_rejection_threshold",
      "scales"};
  require(j.is_object(), "invalid-config", "study config must be an object");
  for (const auto& [key, value] : j.items()) {
    require(known.count(key) != 0, "invalid-config", "unknown config key '" + key + "'");
  }
  const StudyConfig d;
  c.package_size = j.value("package_size", d.package_size);
  c.required_bandwidth = bandwidth_from_string(j.value("required_bandwidth", std::string(to_string(d.required_bandwidth))));
  c.gold_tolerance = j.value("gold_tolerance", d.gold_tolerance);
  c.training_clip_count = j.value("training_clip_count", d.training_clip_count);
  c.jnd_question_count = j.value("jnd_question_count", d.jnd_question_count);
  c.jnd_pass_threshold = j.value("jnd_pass_threshold", d.jnd_pass_threshold);
  c.hearing_pass_fraction = j.value("hearing_pass_fraction", d.hearing_pass_fraction);
  c.feedback_tolerance = j.value("feedback_tolerance", d.feedback_tolerance);
  c.playback_tolerance_s = j.value("playback_tolerance_s", d.playback_tolerance_s);
  c.ttls = d.ttls;
  if (j.contains("certificate_ttls")) {
    const auto& t = j["certificate_ttls"];
    if (t.contains("qualification_s") && !t["qualification_s"].is_null()) {
      c.ttls.qualification = Seconds(t["qualification_s"].get<std::int64_t>());
    }
    c.ttls.environment = Seconds(t.value("environment_s", d.ttls.environment.count()));
    c.ttls.training = Seconds(t.value("training_s", d.ttls.training.count()));
  }
  c.random_seed = j.value("random_seed", d.random_seed);
  c.worker_rejection_threshold = std::nullopt;
  if (j.contains("worker_rejection_threshold") && !j["worker_rejection_threshold"].is_null()) {
    c.worker_rejection_threshold = j["worker_rejection_threshold"].get<double>();
  }
  c.scales = j.contains("scales") ? j["scales"].get<std::vector<ScaleDescriptor>>() : std::vector<ScaleDescriptor>{};
}

}  // namespace p804
