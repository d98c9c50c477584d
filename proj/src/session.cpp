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

#include "p804/session.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>

#include "p804/csv.hpp"
#include "p804/error.hpp"

namespace p804 {

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

void to_json(Json& j, const StimulusCatalog& c) {
  j = Json::object();
  j["hearing"] = Json::array();
  for (const auto& h : c.hearing) j["hearing"].push_back({{"uri", h.uri}, {"digits", h.digits}});
  j["bandwidth"] = Json::array();
  for (const auto& b : c.bandwidth) j["bandwidth"].push_back({{"uri", b.uri}, {"key", b.key}});
  j["jnd"] = Json::array();
  for (const auto& p : c.jnd) {
    j["jnd"].push_back({{"uri_a", p.uri_a}, {"uri_b", p.uri_b}, {"better", p.better == PairChoice::A ? "a" : "b"}});
  }
  j["loudness_sample"] = c.loudness_sample;
  j["training"] = Json::array();
  for (const auto& t : c.training) j["training"].push_back({{"clip", t.clip}, {"reference", t.reference}});
  j["packages"] = c.packages;
}

void from_json(const Json& j, StimulusCatalog& c) {
  c = StimulusCatalog{};
  for (const auto& h : j.value("hearing", Json::array())) {
    c.hearing.push_back({h.at("uri").get<std::string>(), h.at("digits").get<std::string>()});
  }
  for (const auto& b : j.value("bandwidth", Json::array())) {
    c.bandwidth.push_back({b.at("uri").get<std::string>(), b.at("key").get<BandwidthKeyEntry>()});
  }
  for (const auto& p : j.value("jnd", Json::array())) {
    const auto better = p.at("better").get<std::string>();
    require(better == "a" || better == "b", "invalid-config", "jnd 'better' must be 'a' or 'b'");
    c.jnd.push_back({p.at("uri_a").get<std::string>(), p.at("uri_b").get<std::string>(),
                     better == "a" ? PairChoice::A : PairChoice::B});
  }
  c.loudness_sample = j.value("loudness_sample", std::string{});
  for (const auto& t : j.value("training", Json::array())) {
    c.training.push_back({t.at("clip").get<Clip>(), t.at("reference").get<RatingVector>()});
  }
  c.packages = j.value("packages", std::vector<TestPackage>{});
}

StimulusCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("io", "cannot open catalog " + path.string());
  try {
    return Json::parse(in).get<StimulusCatalog>();
  } catch (const Json::exception& e) {
    fail("invalid-config", path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Event log
// ---------------------------------------------------------------------------

EventLog::EventLog(const std::filesystem::path& path) {
  file_.emplace(path, std::ios::app);
  if (!*file_) fail("io", "cannot open event log " + path.string());
}

void EventLog::append(Json record) {
  std::lock_guard lock(mutex_);
  record["seq"] = events_.size() + 1;
  if (file_) {
    *file_ << record.dump() << '\n';
    file_->flush();
    if (!*file_) fail("io", "event log write failed");
  }
  events_.push_back(std::move(record));
}

std::vector<Json> EventLog::snapshot() const {
  std::lock_guard lock(mutex_);
  return events_;
}

std::vector<Json> read_event_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("io", "cannot open event log " + path.string());
  std::vector<Json> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      events.push_back(Json::parse(line));
    } catch (const Json::parse_error&) {
      fail("invalid-input", path.string() + ":" + std::to_string(line_no) + " is not valid JSON");
    }
  }
  return events;
}

std::vector<Submission> submissions_from_events(const std::vector<Json>& events) {
  std::vector<Submission> out;
  for (const auto& e : events) {
    if (e.value("type", "") == "submission") out.push_back(e.at("payload").get<Submission>());
  }
  return out;
}

std::vector<GateViolation> audit_playback_gates(const std::vector<Json>& events) {
  struct Replay {
    std::map<std::string, double> duration;
    std::map<std::string, double> played;
    double tolerance = 0.0;
  };
  std::map<std::string, Replay> sessions;
  std::vector<GateViolation> violations;
  for (const auto& e : events) {
    const auto type = e.value("type", "");
    const auto sid = e.value("session_id", "");
    if (type == "rating-session") {
      auto& r = sessions[sid];
      r.tolerance = e["payload"].value("playback_tolerance_s", 0.0);
      for (const auto& item : e["payload"].at("items")) {
        r.duration[item.at("clip_id").get<std::string>()] = item.at("duration_s").get<double>();
      }
    } else if (type == "playback") {
      sessions[sid].played[e["payload"].at("clip_id").get<std::string>()] += e["payload"].at("seconds").get<double>();
    } else if (type == "submission") {
      const auto sub = e.at("payload").get<Submission>();
      auto& r = sessions[sid];
      for (const auto& item : sub.items) {
        const double played = r.played[item.clip_id];
        const double duration = r.duration.count(item.clip_id) ? r.duration[item.clip_id]
                                                               : std::numeric_limits<double>::infinity();
        if (played < duration - r.tolerance) violations.push_back({sub.submission_id, item.clip_id, played, duration});
      }
    }
  }
  return violations;
}

void export_submissions_csv(const std::vector<Submission>& submissions, std::ostream& out) {
  csv::write_row(out, {"submission_id", "participant_id", "package_id", "clip_id", "model_id", "role", "is_padding",
                       "scale", "vote"});
  for (const auto& s : submissions) {
    for (const auto& item : s.items) {
      for (const auto& [scale, value] : item.ratings.votes()) {
        csv::write_row(out, {s.submission_id, s.participant_id, s.package_id, item.clip_id, item.model_id.value_or(""),
                             std::string(to_string(item.role)), item.is_padding ? "1" : "0",
                             std::string(to_string(scale)), std::to_string(value)});
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Service
// ---------------------------------------------------------------------------

std::string_view to_string(Section s) {
  switch (s) {
    case Section::Qualification: return "qualification";
    case Section::Setup: return "setup";
    case Section::Training: return "training";
    case Section::Rating: return "rating";
    case Section::Done: return "done";
  }
  return "?";
}

struct SessionService::Participant {
  std::string id;
  mutable std::mutex mutex;
  std::map<CertificateKind, Certificate> certificates;
  bool hearing_passed = false;
  bool bandwidth_passed = false;
  std::uint64_t training_epoch = 0;
  std::size_t jnd_attempts = 0;
  std::optional<std::vector<JndPair>> pending_jnd;
  std::set<std::string> completed_packages;
};

struct SessionService::Session {
  std::string id;
  std::string participant_id;
  Section state = Section::Qualification;
  Timestamp started_at{};
  std::optional<std::size_t> package_index;
  std::map<std::string, double> playback;
};

SessionService::SessionService(StudyConfig config, StimulusCatalog catalog, std::shared_ptr<EventLog> log)
    : config_(std::move(config)), catalog_(std::move(catalog)), log_(log ? std::move(log) : std::make_shared<EventLog>()) {
  validate_study_config(config_);
  require(catalog_.training.empty() || catalog_.training.size() == config_.training_clip_count, "invalid-config",
          "catalog lists " + std::to_string(catalog_.training.size()) + " training clips, config expects " +
              std::to_string(config_.training_clip_count));
  for (const auto& t : catalog_.training) {
    require(validate_rating_vector(t.reference).complete(), "invalid-config",
            "training clip '" + t.clip.clip_id + "' needs a complete reference rating");
  }
  for (const auto& pkg : catalog_.packages) {
    try {
      validate_package(pkg, config_.package_size);
    } catch (const Error& e) {
      fail("invalid-config", "package " + pkg.package_id + ": " + e.what());
    }
    std::set<std::string> ids;
    for (const auto& item : presentation_order(pkg)) {
      require(ids.insert(item.clip->clip_id).second, "invalid-config",
              "package " + pkg.package_id + " presents clip '" + item.clip->clip_id + "' twice");
    }
  }
  package_load_.assign(catalog_.packages.size(), 0);
}

SessionService::~SessionService() = default;

void SessionService::record(std::string type, const std::string& participant_id, Timestamp now, Json payload,
                            const std::string& session_id) {
  Json e = {{"type", std::move(type)},
            {"at_ms", now.time_since_epoch().count()},
            {"participant_id", participant_id},
            {"payload", std::move(payload)}};
  if (!session_id.empty()) e["session_id"] = session_id;
  log_->append(std::move(e));
}

void SessionService::register_participant(const std::string& participant_id, Timestamp now) {
  require(!participant_id.empty(), "invalid-argument", "participant id is empty");
  {
    std::unique_lock lock(registry_mutex_);
    if (participants_.count(participant_id)) return;
    auto p = std::make_unique<Participant>();
    p->id = participant_id;
    participants_.emplace(participant_id, std::move(p));
  }
  record("register", participant_id, now, Json::object());
}

bool SessionService::is_registered(const std::string& participant_id) const {
  std::shared_lock lock(registry_mutex_);
  return participants_.count(participant_id) != 0;
}

SessionService::Participant& SessionService::participant(const std::string& participant_id) const {
  std::shared_lock lock(registry_mutex_);
  auto it = participants_.find(participant_id);
  if (it == participants_.end()) fail("unknown-participant", "unknown participant '" + participant_id + "'");
  return *it->second;
}

SessionService::Session& SessionService::session_ref(const std::string& session_id) const {
  std::shared_lock lock(registry_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) fail("unknown-session", "unknown session '" + session_id + "'");
  return *it->second;
}

SectionDecision SessionService::decide(const Participant& p, Timestamp now) const {
  SectionDecision d;
  d.next = Section::Rating;
  const std::pair<CertificateKind, Section> chain[] = {{CertificateKind::Qualification, Section::Qualification},
                                                       {CertificateKind::Environment, Section::Setup},
                                                       {CertificateKind::Training, Section::Training}};
  bool routed = false;
  for (const auto& [kind, section] : chain) {
    auto it = p.certificates.find(kind);
    const char* problem = nullptr;
    if (it == p.certificates.end()) {
      problem = "missing";
    } else if (!it->second.valid_at(now)) {
      problem = "expired";
    }
    if (problem) {
      d.reasons.push_back(std::string(to_string(kind)) + ":" + problem);
      if (!routed) {
        d.next = section;
        routed = true;
      }
    }
  }
  return d;
}

SectionDecision SessionService::next_section(const std::string& participant_id, Timestamp now) const {
  const auto& p = participant(participant_id);
  std::lock_guard lock(p.mutex);
  return decide(p, now);
}

std::vector<Certificate> SessionService::certificates(const std::string& participant_id) const {
  const auto& p = participant(participant_id);
  std::lock_guard lock(p.mutex);
  std::vector<Certificate> out;
  for (const auto& [kind, c] : p.certificates) out.push_back(c);
  return out;
}

ScaleOrder SessionService::current_scale_order(const std::string& participant_id) const {
  const auto& p = participant(participant_id);
  std::lock_guard lock(p.mutex);
  return assign_scale_order(p.id, config_.random_seed, p.training_epoch);
}

Certificate SessionService::issue(Participant& p, CertificateKind kind, Timestamp now) {
  Certificate c{kind, p.id, now, ttl_for(config_, kind)};
  p.certificates[kind] = c;
  record("certificate", p.id, now, c);
  return c;
}

void SessionService::maybe_qualify(Participant& p, Timestamp now, std::optional<Certificate>& out) {
  if (p.hearing_passed && p.bandwidth_passed) out = issue(p, CertificateKind::Qualification, now);
}

namespace {

void require_section(const SectionDecision& d, Section expected) {
  require(d.next == expected, "wrong-section",
          "participant must complete the " + std::string(to_string(d.next)) + " section first");
}

std::string trim(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  return s;
}

}  // namespace

std::vector<std::string> SessionService::hearing_stimuli(const std::string& participant_id) const {
  participant(participant_id);
  std::vector<std::string> out;
  for (const auto& h : catalog_.hearing) out.push_back(h.uri);
  return out;
}

std::vector<std::string> SessionService::bandwidth_stimuli(const std::string& participant_id) const {
  participant(participant_id);
  std::vector<std::string> out;
  for (const auto& b : catalog_.bandwidth) out.push_back(b.uri);
  return out;
}

HearingOutcome SessionService::submit_hearing_test(const std::string& participant_id,
                                                   const std::vector<std::string>& answers, Timestamp now) {
  auto& p = participant(participant_id);
  std::lock_guard lock(p.mutex);
  require_section(decide(p, now), Section::Qualification);
  require(!catalog_.hearing.empty(), "no-stimuli", "no hearing-test stimuli configured");
  require(answers.size() == catalog_.hearing.size(), "answer-count",
          "expected " + std::to_string(catalog_.hearing.size()) + " hearing answers, got " + std::to_string(answers.size()));

  HearingOutcome out;
  out.total = answers.size();
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (trim(answers[i]) == catalog_.hearing[i].digits) ++out.correct;
  }
  out.passed = static_cast<double>(out.correct) >= config_.hearing_pass_fraction * static_cast<double>(out.total) - 1e-9;
  if (out.passed) p.hearing_passed = true;
  record("hearing", p.id, now, {{"correct", out.correct}, {"total", out.total}, {"passed", out.passed}});
  maybe_qualify(p, now, out.qualification);
  return out;
}

BandwidthOutcome SessionService::submit_bandwidth_check(const std::string& participant_id,
                                                        const std::vector<PairAnswer>& answers, Timestamp now) {
  auto& p = participant(participant_id);
  std::lock_guard lock(p.mutex);
  require_section(decide(p, now), Section::Qualification);
  require(!catalog_.bandwidth.empty(), "no-stimuli", "no bandwidth-check stimuli configured");
  require(answers.size() == catalog_.bandwidth.size(), "answer-count",
          "expected " + std::to_string(catalog_.bandwidth.size()) + " bandwidth answers, got " +
              std::to_string(answers.size()));

  BandwidthOutcome out;
  bool heard_all = false, heard_swb = false, heard_fb = false;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const auto& key = catalog_.bandwidth[i].key;
    if (!key.band) {
      if (answers[i] != PairAnswer::Same) out.inattentive = true;
      continue;
    }
    if (answers[i] != PairAnswer::Different) continue;
    switch (key.band->meaning) {
      case BandMeaning::AllDevices: heard_all = true; break;
      case BandMeaning::SwbOrFb: heard_swb = true; break;
      case BandMeaning::FbOnly: heard_fb = true; break;
    }
  }
  out.detected = heard_fb ? Bandwidth::FB : heard_swb ? Bandwidth::SWB : heard_all ? Bandwidth::WB : Bandwidth::NB;
  out.passed = !out.inattentive && heard_all && out.detected >= config_.required_bandwidth;
  if (out.passed) p.bandwidth_passed = true;
  record("bandwidth", p.id, now,
         {{"detected", std::string(to_string(out.detected))}, {"inattentive", out.inattentive}, {"passed", out.passed}});
  maybe_qualify(p, now, out.qualification);
  return out;
}

std::vector<std::pair<std::string, std::string>> SessionService::jnd_stimuli(const std::string& participant_id) {
  auto& p = participant(participant_id);
  std::lock_guard lock(p.mutex);
  const std::size_t count = config_.jnd_question_count;
  require(catalog_.jnd.size() >= count, "no-stimuli", "not enough JND pairs configured");
  std::vector<JndPair> pairs;
  for (std::size_t i = 0; i < count; ++i) pairs.push_back(catalog_.jnd[(p.jnd_attempts * count + i) % catalog_.jnd.size()]);
  p.pending_jnd = pairs;
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& pr : pairs) out.emplace_back(pr.uri_a, pr.uri_b);
  return out;
}

JndOutcome SessionService::submit_jnd_setup(const std::string& participant_id, const std::vector<PairChoice>& answers,
                                            Timestamp now) {
  auto& p = participant(participant_id);
  std::lock_guard lock(p.mutex);
  require_section(decide(p, now), Section::Setup);
  require(p.pending_jnd.has_value(), "no-stimuli", "JND pairs must be requested before answering");
  require(answers.size() == config_.jnd_question_count, "answer-count",
          "expected " + std::to_string(config_.jnd_question_count) + " JND answers, got " + std::to_string(answers.size()));

  JndOutcome out;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (answers[i] == (*p.pending_jnd)[i].better) ++out.correct;
  }
  p.pending_jnd.reset();
  out.attempts = ++p.jnd_attempts;
  out.passed = out.correct >= config_.jnd_pass_threshold;
  record("jnd", p.id, now, {{"correct", out.correct}, {"attempt", out.attempts}, {"passed", out.passed}});
  if (out.passed) out.certificate = issue(p, CertificateKind::Environment, now);
  return out;
}

std::pair<std::vector<Clip>, ScaleOrder> SessionService::training_stimuli(const std::string& participant_id) const {
  const auto& p = participant(participant_id);
  std::lock_guard lock(p.mutex);
  std::vector<Clip> clips;
  for (const auto& t : catalog_.training) clips.push_back(t.clip);
  return {clips, assign_scale_order(p.id, config_.random_seed, p.training_epoch + 1)};
}

TrainingOutcome SessionService::submit_training(const std::string& participant_id,
                                                const std::vector<RatingVector>& ratings, Timestamp now) {
  auto& p = participant(participant_id);
  std::lock_guard lock(p.mutex);
  require_section(decide(p, now), Section::Training);
  require(!catalog_.training.empty(), "no-stimuli", "no training clips configured");
  require(ratings.size() == catalog_.training.size(), "incomplete",
          "expected " + std::to_string(catalog_.training.size()) + " training ratings, got " + std::to_string(ratings.size()));
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    require(validate_rating_vector(ratings[i]).complete(), "incomplete",
            "training rating for '" + catalog_.training[i].clip.clip_id + "' is incomplete");
  }

  TrainingOutcome out;
  const auto order = assign_scale_order(p.id, config_.random_seed, p.training_epoch + 1).presentation();
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    std::vector<FeedbackCell> cells;
    for (auto scale : order) {
      const int vote = ratings[i].at(scale);
      const int reference = catalog_.training[i].reference.at(scale);
      cells.push_back({scale, vote, reference, std::abs(vote - reference) <= config_.feedback_tolerance});
    }
    out.feedback.push_back(std::move(cells));
  }
  p.training_epoch += 1;
  out.training_epoch = p.training_epoch;
  record("training", p.id, now, {{"training_epoch", p.training_epoch}});
  out.certificate = issue(p, CertificateKind::Training, now);
  return out;
}

std::string SessionService::open_session(const std::string& participant_id, Timestamp now) {
  auto& p = participant(participant_id);
  std::lock_guard plock(p.mutex);
  auto s = std::make_unique<Session>();
  s->participant_id = participant_id;
  s->started_at = now;
  s->state = decide(p, now).next;
  std::string id;
  {
    std::unique_lock lock(registry_mutex_);
    id = "ses_" + std::to_string(next_session_++);
    s->id = id;
    sessions_.emplace(id, std::move(s));
  }
  record("session", participant_id, now, Json::object(), id);
  return id;
}

SessionView SessionService::session(const std::string& session_id) const {
  const auto& s = session_ref(session_id);
  const auto& p = participant(s.participant_id);
  std::lock_guard lock(p.mutex);
  SessionView v{s.id, s.participant_id, s.state, std::nullopt};
  if (s.package_index) v.package_id = catalog_.packages[*s.package_index].package_id;
  return v;
}

SessionView SessionService::refresh_session(const std::string& session_id, Timestamp now) {
  auto& s = session_ref(session_id);
  auto& p = participant(s.participant_id);
  {
    std::lock_guard lock(p.mutex);
    if (s.state != Section::Done) s.state = std::max(s.state, decide(p, now).next);
  }
  return session(session_id);
}

const TestPackage& SessionService::assign_package(Participant& p) {
  std::lock_guard lock(package_mutex_);
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < catalog_.packages.size(); ++i) {
    if (p.completed_packages.count(catalog_.packages[i].package_id)) continue;
    if (!best || package_load_[i] < package_load_[*best]) best = i;
  }
  require(best.has_value(), "no-packages", "no package left for participant '" + p.id + "'");
  ++package_load_[*best];
  return catalog_.packages[*best];
}

RatingSessionView SessionService::rating_stimuli(const std::string& session_id, Timestamp now) {
  auto& s = session_ref(session_id);
  auto& p = participant(s.participant_id);
  std::lock_guard lock(p.mutex);
  require(s.state != Section::Done, "wrong-state", "session " + session_id + " is finished");
  const auto d = decide(p, now);
  if (d.next != Section::Rating) {
    throw RedirectError(d.next, "participant must complete the " + std::string(to_string(d.next)) + " section first");
  }
  s.state = Section::Rating;

  const bool fresh = !s.package_index;
  if (fresh) {
    const auto& pkg = assign_package(p);
    s.package_index = static_cast<std::size_t>(&pkg - catalog_.packages.data());
  }
  const auto& pkg = catalog_.packages[*s.package_index];
  RatingSessionView view;
  view.session_id = s.id;
  view.package_id = pkg.package_id;
  view.scale_order = assign_scale_order(p.id, config_.random_seed, p.training_epoch);
  Json items = Json::array();
  for (const auto& item : presentation_order(pkg)) {
    view.items.push_back({item.clip->clip_id, item.clip->uri, item.clip->duration_s});
    items.push_back({{"clip_id", item.clip->clip_id}, {"duration_s", item.clip->duration_s}});
  }
  if (fresh) {
    record("rating-session", p.id, now,
           {{"package_id", pkg.package_id}, {"items", items}, {"playback_tolerance_s", config_.playback_tolerance_s}},
           s.id);
  }
  return view;
}

PlaybackState SessionService::report_playback(const std::string& session_id, const std::string& clip_id,
                                              double seconds_played, Timestamp now) {
  auto& s = session_ref(session_id);
  auto& p = participant(s.participant_id);
  std::lock_guard lock(p.mutex);
  require(s.package_index.has_value(), "no-package", "session " + session_id + " has no package yet");
  require(std::isfinite(seconds_played) && seconds_played >= 0.0, "invalid-argument",
          "played seconds must be finite and non-negative");
  const auto& pkg = catalog_.packages[*s.package_index];
  const Clip* clip = nullptr;
  for (const auto& item : presentation_order(pkg)) {
    if (item.clip->clip_id == clip_id) clip = item.clip;
  }
  require(clip != nullptr, "unknown-clip", "clip '" + clip_id + "' is not part of session " + session_id);

  double& total = s.playback[clip_id];
  total += seconds_played;
  PlaybackState out{clip_id, total, clip->duration_s, total >= clip->duration_s - config_.playback_tolerance_s};
  record("playback", p.id, now, {{"clip_id", clip_id}, {"seconds", seconds_played}, {"total", total}}, s.id);
  return out;
}

Submission SessionService::submit_ratings(const std::string& session_id, const std::vector<ItemRating>& items,
                                          Timestamp now) {
  auto& s = session_ref(session_id);
  auto& p = participant(s.participant_id);
  std::lock_guard lock(p.mutex);

  auto reject = [&](const std::string& code, const std::string& message, const std::string& clip = {}) {
    record("rejected-submission", p.id, now, {{"error", code}, {"message", message}, {"clip_id", clip}}, s.id);
  };

  if (s.state != Section::Rating || !s.package_index) {
    reject("wrong-state", "session is not in the rating section");
    fail("wrong-state", "session " + session_id + " is not in the rating section");
  }
  const auto& pkg = catalog_.packages[*s.package_index];
  const auto order = presentation_order(pkg);
  if (items.size() != order.size()) {
    const std::string msg = "expected " + std::to_string(order.size()) + " rated items, got " + std::to_string(items.size());
    reject("incomplete", msg);
    fail("incomplete", msg);
  }
  std::map<std::string, const RatingVector*> by_clip;
  for (const auto& it : items) by_clip[it.clip_id] = &it.ratings;
  for (const auto& item : order) {
    auto found = by_clip.find(item.clip->clip_id);
    if (found == by_clip.end()) {
      reject("incomplete", "missing rating", item.clip->clip_id);
      fail("incomplete", "no rating for clip '" + item.clip->clip_id + "'");
    }
    if (!validate_rating_vector(*found->second).complete()) {
      reject("incomplete", "incomplete rating vector", item.clip->clip_id);
      fail("incomplete", "rating for clip '" + item.clip->clip_id + "' is incomplete or out of range");
    }
  }
  for (const auto& item : order) {
    const double played = s.playback.count(item.clip->clip_id) ? s.playback.at(item.clip->clip_id) : 0.0;
    if (played < item.clip->duration_s - config_.playback_tolerance_s) {
      reject("locked-clip", "clip not fully played", item.clip->clip_id);
      fail("locked-clip", "clip '" + item.clip->clip_id + "' was not played to the end");
    }
  }
  const auto d = decide(p, now);
  if (d.next != Section::Rating) {
    reject("certificate-expired", "redirect to " + std::string(to_string(d.next)));
    throw RedirectError(d.next, "certificate expired; participant must redo the " + std::string(to_string(d.next)) +
                                    " section");
  }

  Submission sub;
  sub.participant_id = p.id;
  sub.package_id = pkg.package_id;
  sub.session_id = s.id;
  sub.started_at = s.started_at;
  sub.submitted_at = now;
  sub.scale_order = assign_scale_order(p.id, config_.random_seed, p.training_epoch).presentation();
  for (const auto& [kind, c] : p.certificates) sub.certificates.push_back(c);
  sub.controls = pkg.controls;
  for (const auto& item : order) {
    SubmittedItem si;
    si.clip_id = item.clip->clip_id;
    si.model_id = item.clip->model_id;
    si.role = item.role;
    si.is_padding = item.is_padding;
    si.control_index = item.control_index;
    si.ratings = *by_clip.at(si.clip_id);
    sub.items.push_back(std::move(si));
  }

  {
    std::lock_guard slock(submissions_mutex_);
    sub.submission_id = "sub_" + std::to_string(submissions_.size() + 1);
    submissions_.push_back(sub);
  }
  record("submission", p.id, now, sub, s.id);
  p.completed_packages.insert(pkg.package_id);
  s.state = Section::Done;
  return sub;
}

std::vector<Submission> SessionService::submissions() const {
  std::lock_guard lock(submissions_mutex_);
  return submissions_;
}

}  // namespace p804
