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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "p804/domain.hpp"
#include "p804/error.hpp"
#include "p804/packaging.hpp"
#include "p804/stimuli.hpp"
#include "p804/submission.hpp"

namespace p804 {

// ---------------------------------------------------------------------------
// Stimulus catalog: everything the service serves, with answer keys.
// ---------------------------------------------------------------------------

struct HearingItem {
  std::string uri;
  std::string digits;  // expected transcription, e.g. "582"
};

struct BandwidthItem {
  std::string uri;
  BandwidthKeyEntry key;
};

enum class PairChoice : std::uint8_t { A, B };

struct JndPair {
  std::string uri_a;
  std::string uri_b;
  PairChoice better = PairChoice::A;
};

struct TrainingItem {
  Clip clip;
  RatingVector reference;
};

struct StimulusCatalog {
  std::vector<HearingItem> hearing;
  std::vector<BandwidthItem> bandwidth;
  std::vector<JndPair> jnd;
  std::string loudness_sample;
  std::vector<TrainingItem> training;
  std::vector<TestPackage> packages;
};

StimulusCatalog load_catalog(const std::filesystem::path& path);
void to_json(Json& j, const StimulusCatalog& c);
void from_json(const Json& j, StimulusCatalog& c);

// ---------------------------------------------------------------------------
// Event log
// ---------------------------------------------------------------------------

/// Append-only record of every API event. Each append writes one JSON line and
/// flushes before returning.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(const std::filesystem::path& path);

  /// Stamps `seq` into the record and appends it.
  void append(Json record);
  std::vector<Json> snapshot() const;

 private:
  mutable std::mutex mutex_;
  std::vector<Json> events_;
  std::optional<std::ofstream> file_;
};

std::vector<Json> read_event_log(const std::filesystem::path& path);
std::vector<Submission> submissions_from_events(const std::vector<Json>& events);

struct GateViolation {
  std::string submission_id;
  std::string clip_id;
  double played_s = 0.0;
  double duration_s = 0.0;
};

/// Replays playback events and reports every persisted vote on a clip whose
/// playback gate was not met at submission time.
std::vector<GateViolation> audit_playback_gates(const std::vector<Json>& events);

/// Vote-level delimited export of submissions for the analysis pipeline.
void export_submissions_csv(const std::vector<Submission>& submissions, std::ostream& out);

// ---------------------------------------------------------------------------
// Session service
// ---------------------------------------------------------------------------

enum class Section : std::uint8_t { Qualification, Setup, Training, Rating, Done };

std::string_view to_string(Section s);

struct SectionDecision {
  Section next = Section::Qualification;
  std::vector<std::string> reasons;  // e.g. "environment:expired"

  bool operator==(const SectionDecision&) const = default;
};

struct HearingOutcome {
  bool passed = false;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::optional<Certificate> qualification;
};

struct BandwidthOutcome {
  bool passed = false;
  bool inattentive = false;
  Bandwidth detected = Bandwidth::NB;
  std::optional<Certificate> qualification;
};

struct JndOutcome {
  bool passed = false;
  std::size_t correct = 0;
  std::size_t attempts = 0;
  std::optional<Certificate> certificate;
};

struct FeedbackCell {
  ScaleId scale = ScaleId::Noisiness;
  int vote = 0;
  int reference = 0;
  bool ok = true;
};

struct TrainingOutcome {
  std::vector<std::vector<FeedbackCell>> feedback;  // per clip, in scale order
  Certificate certificate;
  std::uint64_t training_epoch = 0;
};

struct PlaybackState {
  std::string clip_id;
  double played_s = 0.0;
  double duration_s = 0.0;
  bool unlocked = false;
};

struct RatingItemView {
  std::string clip_id;
  std::string uri;
  double duration_s = 0.0;
};

struct RatingSessionView {
  std::string session_id;
  std::string package_id;
  std::vector<RatingItemView> items;
  ScaleOrder scale_order;
};

struct ItemRating {
  std::string clip_id;
  RatingVector ratings;
};

struct SessionView {
  std::string session_id;
  std::string participant_id;
  Section state = Section::Qualification;
  std::optional<std::string> package_id;
};

/// Thrown for rejected submissions that must send the participant back to a
/// section (expired certificate).
class RedirectError : public Error {
 public:
  RedirectError(Section redirect, const std::string& message)
      : Error("certificate-expired", message), redirect_(redirect) {}
  Section redirect() const { return redirect_; }

 private:
  Section redirect_;
};

/// Participant flow: qualification (hearing + bandwidth), setup (JND), training
/// and rating. All mutations for one participant are serialized; different
/// participants proceed concurrently.
class SessionService {
 public:
  SessionService(StudyConfig config, StimulusCatalog catalog, std::shared_ptr<EventLog> log = nullptr);
  ~SessionService();

  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  const StudyConfig& config() const { return config_; }
  const StimulusCatalog& catalog() const { return catalog_; }
  EventLog& log() { return *log_; }

  /// Idempotent.
  void register_participant(const std::string& participant_id, Timestamp now);
  bool is_registered(const std::string& participant_id) const;

  SectionDecision next_section(const std::string& participant_id, Timestamp now) const;
  std::vector<Certificate> certificates(const std::string& participant_id) const;
  ScaleOrder current_scale_order(const std::string& participant_id) const;

  // Qualification
  std::vector<std::string> hearing_stimuli(const std::string& participant_id) const;
  std::vector<std::string> bandwidth_stimuli(const std::string& participant_id) const;
  HearingOutcome submit_hearing_test(const std::string& participant_id, const std::vector<std::string>& answers,
                                     Timestamp now);
  BandwidthOutcome submit_bandwidth_check(const std::string& participant_id, const std::vector<PairAnswer>& answers,
                                          Timestamp now);

  // Setup
  std::vector<std::pair<std::string, std::string>> jnd_stimuli(const std::string& participant_id);
  JndOutcome submit_jnd_setup(const std::string& participant_id, const std::vector<PairChoice>& answers, Timestamp now);

  // Training
  /// Training clips with the scale order that completing training will assign.
  std::pair<std::vector<Clip>, ScaleOrder> training_stimuli(const std::string& participant_id) const;
  TrainingOutcome submit_training(const std::string& participant_id, const std::vector<RatingVector>& ratings,
                                  Timestamp now);

  // Rating
  std::string open_session(const std::string& participant_id, Timestamp now);
  SessionView session(const std::string& session_id) const;
  /// Moves the session forward to the participant's current section.
  SessionView refresh_session(const std::string& session_id, Timestamp now);
  /// Assigns a package on first call; requires all certificates valid.
  RatingSessionView rating_stimuli(const std::string& session_id, Timestamp now);
  PlaybackState report_playback(const std::string& session_id, const std::string& clip_id, double seconds_played,
                                Timestamp now);
  Submission submit_ratings(const std::string& session_id, const std::vector<ItemRating>& items, Timestamp now);

  std::vector<Submission> submissions() const;

 private:
  struct Participant;
  struct Session;

  Participant& participant(const std::string& participant_id) const;
  Session& session_ref(const std::string& session_id) const;
  SectionDecision decide(const Participant& p, Timestamp now) const;
  Certificate issue(Participant& p, CertificateKind kind, Timestamp now);
  void maybe_qualify(Participant& p, Timestamp now, std::optional<Certificate>& out);
  const TestPackage& assign_package(Participant& p);
  void record(std::string type, const std::string& participant_id, Timestamp now, Json payload,
              const std::string& session_id = {});

  StudyConfig config_;
  StimulusCatalog catalog_;
  std::shared_ptr<EventLog> log_;

  mutable std::shared_mutex registry_mutex_;
  std::map<std::string, std::unique_ptr<Participant>> participants_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;

  std::mutex package_mutex_;
  std::vector<std::size_t> package_load_;

  mutable std::mutex submissions_mutex_;
  std::vector<Submission> submissions_;
  std::uint64_t next_session_ = 1;
};

}  // namespace p804
