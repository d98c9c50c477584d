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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "p804/error.hpp"
#include "p804/packaging.hpp"
#include "p804/submission.hpp"

using namespace p804;
using namespace std::chrono_literals;

namespace {

template <class T>
T round_trip(const T& value) {
  Json j = value;
  return Json::parse(j.dump()).get<T>();
}

Clip clip(const std::string& id, double duration = 4.0) { return Clip{id, "audio/" + id + ".wav", "m1", "s1", duration}; }

ControlQuestion gold(const std::string& id) {
  ControlQuestion q;
  q.kind = ControlKind::Gold;
  q.clip = clip(id);
  q.expected[ScaleId::Noisiness] = {5, 1};
  q.expected[ScaleId::Overall] = {5, 1};
  return q;
}

TestPackage package() {
  TestPackage p;
  p.package_id = "pkg_0001";
  for (int i = 0; i < 10; ++i) p.rating_clips.push_back(clip("c" + std::to_string(i)));
  p.padding.assign(10, false);
  p.controls = {gold("g1"), ControlQuestion::trapping(clip("t1"), Extreme::Worst)};
  p.positions = {3, 11};
  return p;
}

}  // namespace

TEST(Scale, SevenMembersFiveDimensions) {
  EXPECT_EQ(kAllScales.size(), 7u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_TRUE(is_dimension(kAllScales[i]));
  EXPECT_FALSE(is_dimension(ScaleId::Signal));
  EXPECT_FALSE(is_dimension(ScaleId::Overall));
  for (auto s : kAllScales) EXPECT_EQ(scale_from_string(to_string(s)), s);
  EXPECT_EQ(parse_scale("overall"), ScaleId::Overall);
  EXPECT_FALSE(parse_scale("loudnes").has_value());
}

TEST(RatingVector, Validation) {
  EXPECT_TRUE(validate_rating_vector(RatingVector::uniform(3)).complete());

  auto six = RatingVector::uniform(3);
  RatingVector partial;
  for (auto s : kAllScales) {
    if (s != ScaleId::Overall) partial.set(s, 3);
  }
  const auto missing = validate_rating_vector(partial);
  EXPECT_EQ(missing.missing, std::vector<ScaleId>{ScaleId::Overall});
  EXPECT_TRUE(missing.invalid.empty());

  six.set(ScaleId::Loudness, 6);
  const auto invalid = validate_rating_vector(six);
  ASSERT_EQ(invalid.invalid.size(), 1u);
  EXPECT_EQ(invalid.invalid[0], (Vote{ScaleId::Loudness, 6}));
  EXPECT_FALSE(invalid.complete());
}

TEST(Certificate, TtlBoundary) {
  const Timestamp t0 = timestamp_from_seconds(1'700'000'000);
  const Certificate env{CertificateKind::Environment, "p", t0, 7200s};
  EXPECT_TRUE(env.valid_at(t0));
  EXPECT_TRUE(env.valid_at(t0 + 7199s));
  EXPECT_TRUE(env.valid_at(t0 + 7199999ms));
  EXPECT_FALSE(env.valid_at(t0 + 7200s));
  EXPECT_EQ(env.expires_at(), t0 + 7200s);

  const Certificate qual{CertificateKind::Qualification, "p", t0, std::nullopt};
  EXPECT_TRUE(qual.valid_at(t0 + 24h * 3650));
  EXPECT_FALSE(qual.expires_at().has_value());
}

TEST(Certificate, ValidityMonotone) {
  const Timestamp t0 = timestamp_from_seconds(1000);
  const Certificate c{CertificateKind::Training, "p", t0, 3600s};
  bool previous = true;
  for (int s = 0; s < 8000; s += 7) {
    const bool now = c.valid_at(t0 + std::chrono::seconds(s));
    EXPECT_FALSE(now && !previous);
    previous = now;
  }
}

TEST(StudyConfig, DefaultsAndValidation) {
  StudyConfig c;
  EXPECT_NO_THROW(validate_study_config(c));
  EXPECT_EQ(c.package_size, 10u);
  EXPECT_EQ(c.training_clip_count, 7u);
  EXPECT_EQ(c.jnd_pass_threshold, 4u);
  EXPECT_EQ(c.gold_tolerance, 1);
  EXPECT_EQ(ttl_for(c, CertificateKind::Environment), 7200s);
  EXPECT_EQ(ttl_for(c, CertificateKind::Training), 3600s);
  EXPECT_FALSE(ttl_for(c, CertificateKind::Qualification).has_value());

  c.jnd_pass_threshold = 5;
  EXPECT_THROW(validate_study_config(c), Error);
  c = StudyConfig{};
  c.hearing_pass_fraction = 0.0;
  EXPECT_THROW(validate_study_config(c), Error);
}

TEST(StudyConfig, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "p804_config_test.json";
  {
    std::ofstream out(path);
    out << R"({"package_size": 8, "required_bandwidth": "SWB", "certificate_ttls": {"environment_s": 60}})";
  }
  const auto c = load_study_config(path);
  EXPECT_EQ(c.package_size, 8u);
  EXPECT_EQ(c.required_bandwidth, Bandwidth::SWB);
  EXPECT_EQ(c.ttls.environment, 60s);
  EXPECT_EQ(c.ttls.training, 3600s);
  EXPECT_EQ(round_trip(c), c);

  {
    std::ofstream out(path);
    out << R"({"package_sise": 8})";
  }
  EXPECT_THROW(load_study_config(path), Error);
  std::filesystem::remove(path);

  try {
    load_study_config("/nonexistent/config.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "missing-config");
  }
}

TEST(Controls, Validation) {
  EXPECT_NO_THROW(validate_control(gold("g")));
  auto bad = gold("g");
  bad.expected[ScaleId::Coloration] = {3, 1};
  EXPECT_THROW(validate_control(bad), Error);

  const auto trap = ControlQuestion::trapping(clip("t"), Extreme::Best);
  EXPECT_EQ(trap.expected.size(), 7u);
  for (const auto& [s, e] : trap.expected) {
    EXPECT_EQ(e.value, 5);
    EXPECT_EQ(e.tolerance, 0);
  }
  EXPECT_NO_THROW(validate_control(trap));
}

TEST(Package, PresentationOrderAndValidation) {
  const auto p = package();
  EXPECT_NO_THROW(validate_package(p, 10));
  const auto order = presentation_order(p);
  ASSERT_EQ(order.size(), 12u);
  EXPECT_EQ(order[3].role, ItemRole::Gold);
  EXPECT_EQ(order[11].role, ItemRole::Trapping);
  EXPECT_EQ(order[0].clip->clip_id, "c0");
  EXPECT_EQ(order[4].clip->clip_id, "c3");

  auto leading = p;
  leading.positions = {0, 5};
  EXPECT_THROW(validate_package(leading, 10), Error);
  auto small = p;
  small.rating_clips.pop_back();
  small.padding.pop_back();
  EXPECT_THROW(validate_package(small, 10), Error);
}

TEST(Serialization, RoundTrips) {
  EXPECT_EQ(round_trip(clip("x")), clip("x"));
  Clip bare{"y", "y.wav", std::nullopt, std::nullopt, 2.5};
  EXPECT_EQ(round_trip(bare), bare);
  EXPECT_EQ(round_trip(gold("g")), gold("g"));
  EXPECT_EQ(round_trip(package()), package());
  EXPECT_EQ(round_trip(RatingVector::uniform(2)), RatingVector::uniform(2));
  const Certificate c{CertificateKind::Environment, "p", timestamp_from_seconds(12.5), 7200s};
  EXPECT_EQ(round_trip(c), c);
  const Certificate q{CertificateKind::Qualification, "p", timestamp_from_seconds(1), std::nullopt};
  EXPECT_EQ(round_trip(q), q);
  EXPECT_EQ(round_trip(assign_scale_order("w1", 3, 2)), assign_scale_order("w1", 3, 2));

  Submission s;
  s.submission_id = "sub_1";
  s.participant_id = "p";
  s.package_id = "pkg_0001";
  s.session_id = "ses_1";
  s.started_at = timestamp_from_seconds(10);
  s.submitted_at = timestamp_from_seconds(20);
  s.scale_order = assign_scale_order("p", 1, 1).presentation();
  s.certificates = {c, q};
  s.controls = package().controls;
  s.items.push_back({"c1", "m1", ItemRole::Rating, false, std::nullopt, RatingVector::uniform(4)});
  s.items.push_back({"g1", std::nullopt, ItemRole::Gold, false, 0, RatingVector::uniform(5)});
  EXPECT_EQ(round_trip(s), s);
}
