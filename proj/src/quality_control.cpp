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

#include "p804/quality_control.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include <boost/math/distributions/students_t.hpp>

#include "p804/csv.hpp"
#include "p804/error.hpp"

namespace p804 {

GoldResult check_gold(const RatingVector& vector, const ControlQuestion& control) {
  require(control.kind == ControlKind::Gold, "kind-mismatch", "check_gold needs a gold control");
  GoldResult out;
  for (const auto& [scale, e] : control.expected) {
    const auto vote = vector.get(scale);
    if (!vote || std::abs(*vote - e.value) > e.tolerance) {
      out.deviations.push_back({scale, vote, e.value});
    }
  }
  out.passed = out.deviations.empty();
  return out;
}

bool check_trapping(const RatingVector& vector, const ControlQuestion& control) {
  require(control.kind == ControlKind::Trapping, "kind-mismatch", "check_trapping needs a trapping control");
  require(!control.expected.empty(), "invalid-argument", "trapping control has no instructed answer");
  const int instructed = control.expected.begin()->second.value;
  return std::all_of(kAllScales.begin(), kAllScales.end(), [&](ScaleId s) { return vector.get(s) == instructed; });
}

std::string_view to_string(RejectionKind k) {
  switch (k) {
    case RejectionKind::GoldDeviation: return "gold-deviation";
    case RejectionKind::TrappingFailed: return "trapping-failed";
    case RejectionKind::IncompleteVotes: return "incomplete-votes";
    case RejectionKind::WorkerEscalation: return "worker-escalation";
  }
  return "?";
}

AcceptanceResult accept_submission(const Submission& submission, const std::vector<ControlQuestion>& controls) {
  AcceptanceResult result;
  result.submission_id = submission.submission_id;
  result.participant_id = submission.participant_id;

  std::vector<const SubmittedItem*> answers(controls.size(), nullptr);
  for (const auto& item : submission.items) {
    if (item.role == ItemRole::Rating) continue;
    std::optional<std::size_t> index = item.control_index;
    if (!index) {
      for (std::size_t c = 0; c < controls.size(); ++c) {
        if (controls[c].clip.clip_id == item.clip_id) index = c;
      }
    }
    require(index && *index < controls.size(), "missing-control",
            "submission " + submission.submission_id + " answers an unknown control '" + item.clip_id + "'");
    answers[*index] = &item;
  }

  for (const auto& item : submission.items) {
    if (!validate_rating_vector(item.ratings).complete()) {
      result.reasons.push_back({RejectionKind::IncompleteVotes, item.clip_id, std::nullopt});
    }
  }
  for (std::size_t c = 0; c < controls.size(); ++c) {
    require(answers[c] != nullptr, "missing-control",
            "submission " + submission.submission_id + " has no answer for control '" + controls[c].clip.clip_id + "'");
    const auto& control = controls[c];
    const auto& ratings = answers[c]->ratings;
    if (control.kind == ControlKind::Gold) {
      for (const auto& d : check_gold(ratings, control).deviations) {
        result.reasons.push_back({RejectionKind::GoldDeviation, control.clip.clip_id, d});
      }
    } else if (!check_trapping(ratings, control)) {
      result.reasons.push_back({RejectionKind::TrappingFailed, control.clip.clip_id, std::nullopt});
    }
  }
  result.accepted = result.reasons.empty();
  return result;
}

void apply_worker_escalation(std::vector<AcceptanceResult>& results, double threshold) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // rejected, total
  for (const auto& r : results) {
    auto& t = tally[r.participant_id];
    t.first += r.accepted ? 0 : 1;
    t.second += 1;
  }
  for (auto& r : results) {
    const auto& [rejected, total] = tally[r.participant_id];
    if (r.accepted && static_cast<double>(rejected) / static_cast<double>(total) > threshold) {
      r.accepted = false;
      r.reasons.push_back({RejectionKind::WorkerEscalation, {}, std::nullopt});
    }
  }
}

std::vector<AcceptedVote> collect_accepted_votes(const std::vector<Submission>& submissions,
                                                 const std::vector<AcceptanceResult>& results) {
  require(submissions.size() == results.size(), "invalid-argument", "one acceptance result per submission expected");
  std::vector<AcceptedVote> votes;
  for (std::size_t i = 0; i < submissions.size(); ++i) {
    if (!results[i].accepted) continue;
    const auto& s = submissions[i];
    for (const auto& item : s.items) {
      if (item.role != ItemRole::Rating || item.is_padding) continue;
      for (const auto& [scale, value] : item.ratings.votes()) {
        votes.push_back({item.clip_id, item.model_id, s.participant_id, s.submission_id, scale, value});
      }
    }
  }
  return votes;
}

std::string_view to_string(MosLevel l) { return l == MosLevel::Clip ? "clip" : "model"; }

MosLevel mos_level_from_string(std::string_view s) {
  if (s == "clip") return MosLevel::Clip;
  if (s == "model") return MosLevel::Model;
  fail("invalid-argument", "level must be 'clip' or 'model'");
}

double ci95_halfwidth(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  return boost::math::quantile(dist, 0.975) * sd / std::sqrt(static_cast<double>(n));
}

namespace {

MosEntry summarize(std::string key, ScaleId scale, const std::vector<double>& values) {
  MosEntry e;
  e.key = std::move(key);
  e.scale = scale;
  e.n = values.size();
  e.mos = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  e.ci95_halfwidth = ci95_halfwidth(values);
  return e;
}

}  // namespace

std::vector<MosEntry> aggregate_mos(const std::vector<AcceptedVote>& votes, MosLevel level) {
  require(!votes.empty(), "no-accepted-votes", "no accepted votes");
  std::map<std::pair<std::string, ScaleId>, std::vector<double>> per_clip;
  std::map<std::string, std::optional<std::string>> clip_model;
  for (const auto& v : votes) {
    per_clip[{v.clip_id, v.scale}].push_back(v.value);
    clip_model[v.clip_id] = v.model_id;
  }

  std::vector<MosEntry> clips;
  for (auto& [key, values] : per_clip) {
    // Sorting makes the floating-point sum independent of vote order.
    std::sort(values.begin(), values.end());
    clips.push_back(summarize(key.first, key.second, values));
  }
  if (level == MosLevel::Clip) return clips;

  std::map<std::pair<std::string, ScaleId>, std::vector<double>> per_model;
  for (const auto& e : clips) {
    const auto& model = clip_model[e.key];
    require(model.has_value(), "invalid-input", "clip '" + e.key + "' has no model id");
    per_model[{*model, e.scale}].push_back(e.mos);
  }
  std::vector<MosEntry> models;
  for (auto& [key, values] : per_model) {
    std::sort(values.begin(), values.end());
    models.push_back(summarize(key.first, key.second, values));
  }
  return models;
}

void write_vote_table(const std::vector<AcceptedVote>& votes, std::ostream& out) {
  csv::write_row(out, {"submission_id", "participant_id", "clip_id", "model_id", "scale", "vote"});
  for (const auto& v : votes) {
    csv::write_row(out, {v.submission_id, v.participant_id, v.clip_id, v.model_id.value_or(""),
                         std::string(to_string(v.scale)), std::to_string(v.value)});
  }
}

std::vector<AcceptedVote> read_vote_table(std::istream& in) {
  const auto t = csv::read_table(in);
  if (t.header.empty()) return {};
  const auto sub = t.column("submission_id"), part = t.column("participant_id"), clip = t.column("clip_id"),
             model = t.column("model_id"), scale = t.column("scale"), vote = t.column("vote");
  std::vector<AcceptedVote> votes;
  for (const auto& r : t.rows) {
    require(r.size() == t.header.size(), "invalid-input", "vote table row has the wrong number of fields");
    AcceptedVote v;
    v.submission_id = r[sub];
    v.participant_id = r[part];
    v.clip_id = r[clip];
    if (!r[model].empty()) v.model_id = r[model];
    v.scale = scale_from_string(r[scale]);
    try {
      v.value = std::stoi(r[vote]);
    } catch (const std::exception&) {
      fail("invalid-input", "non-integer vote for clip '" + v.clip_id + "'");
    }
    require(v.value >= kMinVote && v.value <= kMaxVote, "invalid-input", "vote out of range for clip '" + v.clip_id + "'");
    votes.push_back(std::move(v));
  }
  return votes;
}

namespace {
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

void write_mos_table(const std::vector<MosEntry>& entries, std::ostream& out) {
  csv::write_row(out, {"key", "scale", "mos", "ci95", "n"});
  for (const auto& e : entries) {
    csv::write_row(out, {e.key, std::string(to_string(e.scale)), fmt(e.mos), fmt(e.ci95_halfwidth), std::to_string(e.n)});
  }
}

std::vector<MosEntry> read_mos_table(std::istream& in) {
  const auto t = csv::read_table(in);
  const auto key = t.column("key"), scale = t.column("scale"), mos = t.column("mos"), ci = t.column("ci95"),
             n = t.column("n");
  std::vector<MosEntry> out;
  for (const auto& r : t.rows) {
    require(r.size() == t.header.size(), "invalid-input", "MOS table row has the wrong number of fields");
    MosEntry e;
    e.key = r[key];
    e.scale = scale_from_string(r[scale]);
    try {
      e.mos = std::stod(r[mos]);
      e.ci95_halfwidth = std::stod(r[ci]);
      e.n = static_cast<std::size_t>(std::stoul(r[n]));
    } catch (const std::exception&) {
      fail("invalid-input", "malformed MOS row for '" + e.key + "'");
    }
    out.push_back(std::move(e));
  }
  return out;
}

void write_acceptance_report(const std::vector<AcceptanceResult>& results, std::ostream& out) {
  csv::write_row(out, {"submission_id", "participant_id", "accepted", "reasons"});
  for (const auto& r : results) {
    std::string reasons;
    for (const auto& reason : r.reasons) {
      if (!reasons.empty()) reasons += ';';
      reasons += to_string(reason.kind);
      if (!reason.clip_id.empty()) reasons += ":" + reason.clip_id;
      if (reason.deviation) {
        reasons += ":" + std::string(to_string(reason.deviation->scale)) + "=" +
                   (reason.deviation->got ? std::to_string(*reason.deviation->got) : "none") + "/" +
                   std::to_string(reason.deviation->expected);
      }
    }
    csv::write_row(out, {r.submission_id, r.participant_id, r.accepted ? "1" : "0", reasons});
  }
}

}  // namespace p804
