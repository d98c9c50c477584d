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


// Study fixtures shared by the session, HTTP and acceptance tests.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "p804/packaging.hpp"
#include "p804/session.hpp"

namespace fixture {

inline p804::Clip clip(const std::string& id, double duration, std::optional<std::string> model = std::nullopt) {
  return {id, "audio/" + id + ".wav", std::move(model), std::nullopt, duration};
}

inline std::vector<p804::ControlQuestion> gold_pool() {
  std::vector<p804::ControlQuestion> out;
  for (int i = 0; i < 3; ++i) {
    p804::ControlQuestion q;
    q.kind = p804::ControlKind::Gold;
    q.clip = clip("gold" + std::to_string(i), 5.0);
    q.expected[p804::ScaleId::Overall] = {5, 1};
    q.expected[p804::ScaleId::Noisiness] = {5, 1};
    out.push_back(q);
  }
  return out;
}

inline std::vector<p804::ControlQuestion> trapping_pool() {
  std::vector<p804::ControlQuestion> out;
  for (int i = 0; i < 3; ++i) {
    out.push_back(p804::ControlQuestion::trapping(clip("trap" + std::to_string(i), 6.0),
                                                  i % 2 ? p804::Extreme::Best : p804::Extreme::Worst));
  }
  return out;
}

/// Hearing answers "000".."009", bandwidth key with all three bands, eight
/// JND pairs, seven training clips and packages over `n_clips` clips.
inline p804::StimulusCatalog catalog(std::size_t n_clips = 40, const p804::StudyConfig& config = {}) {
  p804::StimulusCatalog c;
  for (int i = 0; i < 10; ++i) c.hearing.push_back({"hearing/" + std::to_string(i) + ".wav", "00" + std::to_string(i)});
  using p804::PairAnswer;
  const auto& bands = p804::kBandwidthCheckBands;
  c.bandwidth = {{"bw/0.wav", {PairAnswer::Different, bands[1]}},
                 {"bw/1.wav", {PairAnswer::Same, std::nullopt}},
                 {"bw/2.wav", {PairAnswer::Different, bands[0]}},
                 {"bw/3.wav", {PairAnswer::Different, bands[2]}},
                 {"bw/4.wav", {PairAnswer::Same, std::nullopt}}};
  for (int i = 0; i < 8; ++i) {
    c.jnd.push_back({"jnd/" + std::to_string(i) + "a.wav", "jnd/" + std::to_string(i) + "b.wav",
                     i % 3 ? p804::PairChoice::A : p804::PairChoice::B});
  }
  c.loudness_sample = "loudness.wav";
  for (std::size_t i = 0; i < config.training_clip_count; ++i) {
    auto ref = p804::RatingVector::uniform(static_cast<int>(1 + i % 5));
    c.training.push_back({clip("train" + std::to_string(i), 4.0), ref});
  }
  std::vector<p804::Clip> clips;
  for (std::size_t i = 0; i < n_clips; ++i) {
    clips.push_back(clip("c" + std::to_string(i), 4.0 + static_cast<double>(i % 5), "model" + std::to_string(i % 4)));
  }
  c.packages = p804::build_packages(clips, gold_pool(), trapping_pool(), config, 7);
  return c;
}

inline std::vector<std::string> hearing_answers(const p804::StimulusCatalog& c, std::size_t wrong = 0) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < c.hearing.size(); ++i) out.push_back(i < wrong ? "999" : c.hearing[i].digits);
  return out;
}

inline std::vector<p804::PairAnswer> bandwidth_answers(const p804::StimulusCatalog& c) {
  std::vector<p804::PairAnswer> out;
  for (const auto& b : c.bandwidth) out.push_back(b.key.expected);
  return out;
}

inline std::vector<p804::PairChoice> jnd_answers(const p804::StimulusCatalog& c,
                                                 const std::vector<std::pair<std::string, std::string>>& served,
                                                 bool correct = true) {
  std::vector<p804::PairChoice> out;
  for (const auto& [a, b] : served) {
    for (const auto& p : c.jnd) {
      if (p.uri_a == a && p.uri_b == b) {
        const bool pick_a = (p.better == p804::PairChoice::A) == correct;
        out.push_back(pick_a ? p804::PairChoice::A : p804::PairChoice::B);
      }
    }
  }
  return out;
}

inline std::vector<p804::RatingVector> training_ratings(const p804::StimulusCatalog& c) {
  std::vector<p804::RatingVector> out;
  for (const auto& t : c.training) out.push_back(t.reference);
  return out;
}

/// Answers that pass every control in `view`'s package.
inline std::vector<p804::ItemRating> passing_ratings(const p804::StimulusCatalog& c, const std::string& package_id,
                                                     int rating_vote = 3) {
  for (const auto& pkg : c.packages) {
    if (pkg.package_id != package_id) continue;
    std::vector<p804::ItemRating> out;
    for (const auto& item : p804::presentation_order(pkg)) {
      p804::RatingVector rv = p804::RatingVector::uniform(rating_vote);
      if (item.control_index) {
        for (const auto& [scale, e] : pkg.controls[*item.control_index].expected) rv.set(scale, e.value);
      }
      out.push_back({item.clip->clip_id, rv});
    }
    return out;
  }
  throw std::runtime_error("no package " + package_id);
}

/// Walks a participant through qualification, setup and training at `now`.
inline void certify(p804::SessionService& s, const std::string& pid, p804::Timestamp now) {
  const auto& c = s.catalog();
  s.register_participant(pid, now);
  s.submit_hearing_test(pid, hearing_answers(c), now);
  s.submit_bandwidth_check(pid, bandwidth_answers(c), now);
  const auto served = s.jnd_stimuli(pid);
  s.submit_jnd_setup(pid, jnd_answers(c, served), now);
  s.submit_training(pid, training_ratings(c), now);
}

/// Plays every item of the session's package to the end.
inline void play_all(p804::SessionService& s, const p804::RatingSessionView& view, p804::Timestamp now) {
  for (const auto& item : view.items) s.report_playback(view.session_id, item.clip_id, item.duration_s, now);
}

}  // namespace fixture
