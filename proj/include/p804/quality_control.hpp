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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "p804/domain.hpp"
#include "p804/submission.hpp"

namespace p804 {

struct GoldDeviation {
  ScaleId scale = ScaleId::Noisiness;
  std::optional<int> got;  // nullopt: no vote on the scale
  int expected = 0;

  bool operator==(const GoldDeviation&) const = default;
};

struct GoldResult {
  bool passed = true;
  std::vector<GoldDeviation> deviations;
};

/// Passes iff every expected scale satisfies |vote - expected| <= tolerance.
GoldResult check_gold(const RatingVector& vector, const ControlQuestion& control);

/// Passes iff all seven votes equal the instructed extreme exactly.
bool check_trapping(const RatingVector& vector, const ControlQuestion& control);

enum class RejectionKind : std::uint8_t { GoldDeviation, TrappingFailed, IncompleteVotes, WorkerEscalation };

std::string_view to_string(RejectionKind k);

struct RejectionReason {
  RejectionKind kind = RejectionKind::GoldDeviation;
  std::string clip_id;
  std::optional<GoldDeviation> deviation;

  bool operator==(const RejectionReason&) const = default;
};

struct AcceptanceResult {
  std::string submission_id;
  std::string participant_id;
  bool accepted = true;
  std::vector<RejectionReason> reasons;
};

/// Accepted iff gold passes, trapping passes and every rating vector is
/// complete. Throws Error("missing-control") when a control has no answer.
AcceptanceResult accept_submission(const Submission& submission, const std::vector<ControlQuestion>& controls);
inline AcceptanceResult accept_submission(const Submission& submission) {
  return accept_submission(submission, submission.controls);
}

/// Rejects every submission of a worker whose rejection rate exceeds
/// `threshold`.
void apply_worker_escalation(std::vector<AcceptanceResult>& results, double threshold);

/// One vote on a rating clip from an accepted submission.
struct AcceptedVote {
  std::string clip_id;
  std::optional<std::string> model_id;
  std::string participant_id;
  std::string submission_id;
  ScaleId scale = ScaleId::Noisiness;
  int value = 0;

  bool operator==(const AcceptedVote&) const = default;
};

/// Votes of accepted submissions; control items and padding repeats dropped.
std::vector<AcceptedVote> collect_accepted_votes(const std::vector<Submission>& submissions,
                                                 const std::vector<AcceptanceResult>& results);

enum class MosLevel : std::uint8_t { Clip, Model };

std::string_view to_string(MosLevel l);
MosLevel mos_level_from_string(std::string_view s);

struct MosEntry {
  std::string key;  // clip_id or model_id
  ScaleId scale = ScaleId::Noisiness;
  double mos = 0.0;
  double ci95_halfwidth = 0.0;
  std::size_t n = 0;  // votes (clip level) or clips (model level)
};

/// Two-sided 95% Student-t half-width: t(0.975, n-1) * s / sqrt(n). Zero for n == 1.
double ci95_halfwidth(const std::vector<double>& values);

/// Clip level: mean vote per (clip, scale). Model level: unweighted mean of
/// the model's clip MOS values. Entries are sorted by key, then scale.
/// Throws Error("no-accepted-votes") on empty input.
std::vector<MosEntry> aggregate_mos(const std::vector<AcceptedVote>& votes, MosLevel level);

// Delimited-text tables used between pipeline stages.
void write_vote_table(const std::vector<AcceptedVote>& votes, std::ostream& out);
std::vector<AcceptedVote> read_vote_table(std::istream& in);
void write_mos_table(const std::vector<MosEntry>& entries, std::ostream& out);
std::vector<MosEntry> read_mos_table(std::istream& in);
void write_acceptance_report(const std::vector<AcceptanceResult>& results, std::ostream& out);

}  // namespace p804
