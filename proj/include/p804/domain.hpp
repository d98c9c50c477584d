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
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace p804 {

using Json = nlohmann::json;

/// Server-side wall clock with millisecond resolution.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using Seconds = std::chrono::seconds;

inline Timestamp timestamp_from_seconds(double seconds_since_epoch) {
  return Timestamp(std::chrono::milliseconds(static_cast<std::int64_t>(seconds_since_epoch * 1000.0)));
}
inline double seconds_since_epoch(Timestamp t) {
  return static_cast<double>(t.time_since_epoch().count()) / 1000.0;
}

// ---------------------------------------------------------------------------
// Scales
// ---------------------------------------------------------------------------

/// The seven rated scales. The first five are perceptual dimensions, the last
/// two are the quality scales that always close the presentation.
enum class ScaleId : std::uint8_t {
  Noisiness,
  Coloration,
  Discontinuity,
  Loudness,
  Reverberation,
  Signal,
  Overall,
};

inline constexpr std::size_t kScaleCount = 7;
inline constexpr std::size_t kDimensionCount = 5;

inline constexpr std::array<ScaleId, kScaleCount> kAllScales = {
    ScaleId::Noisiness, ScaleId::Coloration, ScaleId::Discontinuity, ScaleId::Loudness,
    ScaleId::Reverberation, ScaleId::Signal, ScaleId::Overall};

inline constexpr std::array<ScaleId, kDimensionCount> kDimensionScales = {
    ScaleId::Noisiness, ScaleId::Coloration, ScaleId::Discontinuity, ScaleId::Loudness,
    ScaleId::Reverberation};

constexpr bool is_dimension(ScaleId s) { return s != ScaleId::Signal && s != ScaleId::Overall; }
constexpr std::size_t scale_index(ScaleId s) { return static_cast<std::size_t>(s); }

std::string_view to_string(ScaleId s);
std::optional<ScaleId> parse_scale(std::string_view name);
/// Throws Error("invalid-argument") for unknown names.
ScaleId scale_from_string(std::string_view name);

inline constexpr int kMinVote = 1;
inline constexpr int kMaxVote = 5;

struct ScaleDescriptor {
  ScaleId scale = ScaleId::Noisiness;
  std::string low_label;
  std::string high_label;
  std::array<std::string, 3> adjectives_low;
  std::array<std::string, 3> adjectives_high;

  bool operator==(const ScaleDescriptor&) const = default;
};

// ---------------------------------------------------------------------------
// Votes
// ---------------------------------------------------------------------------

struct Vote {
  ScaleId scale = ScaleId::Noisiness;
  int value = 0;

  bool in_range() const { return value >= kMinVote && value <= kMaxVote; }
  bool operator==(const Vote&) const = default;
};

/// A participant's votes on one clip. Values are stored as given; use
/// validate_rating_vector() before trusting them.
class RatingVector {
 public:
  RatingVector() = default;
  static RatingVector uniform(int value);

  void set(ScaleId scale, int value) { votes_[scale] = value; }
  std::optional<int> get(ScaleId scale) const;
  /// Throws if the scale has no vote.
  int at(ScaleId scale) const;
  bool has(ScaleId scale) const { return votes_.count(scale) != 0; }
  const std::map<ScaleId, int>& votes() const { return votes_; }
  std::size_t size() const { return votes_.size(); }

  bool operator==(const RatingVector&) const = default;

 private:
  std::map<ScaleId, int> votes_;
};

struct RatingValidation {
  std::vector<ScaleId> missing;
  std::vector<Vote> invalid;

  bool complete() const { return missing.empty() && invalid.empty(); }
};

RatingValidation validate_rating_vector(const RatingVector& rv);

// ---------------------------------------------------------------------------
// Clips, controls, packages
// ---------------------------------------------------------------------------

struct Clip {
  std::string clip_id;
  std::string uri;
  std::optional<std::string> model_id;
  std::optional<std::string> source_id;
  double duration_s = 0.0;

  bool operator==(const Clip&) const = default;
};

/// Throws Error("invalid-argument") on empty id or non-positive duration.
void validate_clip(const Clip& clip);

enum class ControlKind : std::uint8_t { Gold, Trapping };

std::string_view to_string(ControlKind k);
ControlKind control_kind_from_string(std::string_view name);

/// Which end of every scale a trapping instruction asks for.
enum class Extreme : std::uint8_t { Worst, Best };

constexpr int extreme_value(Extreme e) { return e == Extreme::Best ? kMaxVote : kMinVote; }

struct Expectation {
  int value = kMaxVote;  // 1 or 5
  int tolerance = 0;

  bool operator==(const Expectation&) const = default;
};

struct ControlQuestion {
  ControlKind kind = ControlKind::Gold;
  Clip clip;
  std::map<ScaleId, Expectation> expected;

  static ControlQuestion trapping(Clip clip, Extreme extreme);
  bool operator==(const ControlQuestion&) const = default;
};

/// Gold expectations sit at scale extremes; trapping expectations cover all
/// seven scales with one extreme and zero tolerance.
void validate_control(const ControlQuestion& control);

inline constexpr std::size_t kControlsPerPackage = 2;

struct TestPackage {
  std::string package_id;
  std::vector<Clip> rating_clips;
  /// Parallel to rating_clips; padded repeats are excluded from analysis.
  std::vector<bool> padding;
  std::vector<ControlQuestion> controls;
  /// Index of each control inside the presentation sequence
  /// (rating_clips.size() + controls.size() items).
  std::vector<std::size_t> positions;

  std::size_t item_count() const { return rating_clips.size() + controls.size(); }

  bool operator==(const TestPackage&) const = default;
};

enum class ItemRole : std::uint8_t { Rating, Gold, Trapping };

struct PresentedItem {
  const Clip* clip = nullptr;
  ItemRole role = ItemRole::Rating;
  bool is_padding = false;
  std::optional<std::size_t> control_index;
};

/// Items in presentation order, controls injected at their positions.
std::vector<PresentedItem> presentation_order(const TestPackage& package);

/// Checks the package invariants for a given rating-clip count.
void validate_package(const TestPackage& package, std::size_t package_size);

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

enum class CertificateKind : std::uint8_t { Qualification, Environment, Training };

std::string_view to_string(CertificateKind k);
CertificateKind certificate_kind_from_string(std::string_view name);

struct Certificate {
  CertificateKind kind = CertificateKind::Qualification;
  std::string participant_id;
  Timestamp issued_at{};
  std::optional<Seconds> ttl;  // nullopt: never expires

  /// valid(now) <=> now - issued_at < ttl
  bool valid_at(Timestamp now) const;
  std::optional<Timestamp> expires_at() const;

  bool operator==(const Certificate&) const = default;
};

// ---------------------------------------------------------------------------
// Study configuration
// ---------------------------------------------------------------------------

enum class Bandwidth : std::uint8_t { NB, WB, SWB, FB };

std::string_view to_string(Bandwidth b);
Bandwidth bandwidth_from_string(std::string_view name);

struct CertificateTtls {
  std::optional<Seconds> qualification;  // permanent
  Seconds environment{7200};
  Seconds training{3600};

  bool operator==(const CertificateTtls&) const = default;
};

struct StudyConfig {
  std::size_t package_size = 10;
  Bandwidth required_bandwidth = Bandwidth::FB;
  int gold_tolerance = 1;
  std::size_t training_clip_count = 7;
  std::size_t jnd_question_count = 4;
  std::size_t jnd_pass_threshold = 4;
  double hearing_pass_fraction = 0.8;
  int feedback_tolerance = 1;
  /// Playback may fall short of the clip duration by this much.
  double playback_tolerance_s = 0.0;
  CertificateTtls ttls;
  std::uint64_t random_seed = 1;
  /// Reject every submission of a worker whose rejection rate exceeds this.
  std::optional<double> worker_rejection_threshold;
  std::vector<ScaleDescriptor> scales;

  bool operator==(const StudyConfig&) const = default;
};

void validate_study_config(const StudyConfig& config);

std::optional<Seconds> ttl_for(const StudyConfig& config, CertificateKind kind);

StudyConfig load_study_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// JSON encoding
// ---------------------------------------------------------------------------

void to_json(Json& j, ScaleId s);
void from_json(const Json& j, ScaleId& s);
void to_json(Json& j, const ScaleDescriptor& d);
void from_json(const Json& j, ScaleDescriptor& d);
void to_json(Json& j, const RatingVector& rv);
void from_json(const Json& j, RatingVector& rv);
void to_json(Json& j, const Clip& c);
void from_json(const Json& j, Clip& c);
void to_json(Json& j, const ControlQuestion& q);
void from_json(const Json& j, ControlQuestion& q);
void to_json(Json& j, const TestPackage& p);
void from_json(const Json& j, TestPackage& p);
void to_json(Json& j, const Certificate& c);
void from_json(const Json& j, Certificate& c);
void to_json(Json& j, const StudyConfig& c);
void from_json(const Json& j, StudyConfig& c);

}  // namespace p804
