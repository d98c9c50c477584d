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

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "p804/error.hpp"
#include "p804/packaging.hpp"

using namespace p804;

namespace {

std::vector<Clip> manifest(std::size_t n, const std::string& prefix = "clip") {
  std::vector<Clip> clips;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = prefix + std::to_string(i);
    clips.push_back({id, "stimuli/" + id + ".wav", "model" + std::to_string(i % 18), std::nullopt, 4.0 + (i % 5)});
  }
  return clips;
}

std::vector<ControlQuestion> golds(std::size_t n) {
  std::vector<ControlQuestion> out;
  for (std::size_t i = 0; i < n; ++i) {
    ControlQuestion q;
    q.kind = ControlKind::Gold;
    q.clip = {"gold" + std::to_string(i), "gold/" + std::to_string(i) + ".wav", std::nullopt, std::nullopt, 5.0};
    q.expected[ScaleId::Overall] = {i % 2 ? 1 : 5, 1};
    out.push_back(q);
  }
  return out;
}

std::vector<ControlQuestion> traps(std::size_t n) {
  std::vector<ControlQuestion> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(ControlQuestion::trapping(
        {"trap" + std::to_string(i), "trap/" + std::to_string(i) + ".wav", std::nullopt, std::nullopt, 6.0},
        i % 2 ? Extreme::Best : Extreme::Worst));
  }
  return out;
}

// Partition property plus per-package structure.
void check_partition(const std::vector<Clip>& clips, const std::vector<TestPackage>& packages, std::size_t size) {
  std::multiset<std::string> seen;
  std::set<std::string> input;
  for (const auto& c : clips) input.insert(c.clip_id);
  for (const auto& p : packages) {
    ASSERT_NO_THROW(validate_package(p, size));
    ASSERT_EQ(p.rating_clips.size(), size);
    ASSERT_EQ(p.controls.size(), 2u);
    ASSERT_EQ(p.controls[0].kind, ControlKind::Gold);
    ASSERT_EQ(p.controls[1].kind, ControlKind::Trapping);
    for (auto pos : p.positions) ASSERT_NE(pos, 0u);
    std::set<std::string> in_package;
    for (std::size_t i = 0; i < p.rating_clips.size(); ++i) {
      const auto& id = p.rating_clips[i].clip_id;
      ASSERT_TRUE(input.count(id));
      ASSERT_TRUE(in_package.insert(id).second || size > clips.size());
      if (!p.padding[i]) seen.insert(id);
    }
  }
  ASSERT_EQ(seen.size(), clips.size());
  ASSERT_EQ(std::set<std::string>(seen.begin(), seen.end()), input);
}

}  // namespace

TEST(BuildPackages, NineHundredFiftyClips) {
  const auto clips = manifest(950);
  const auto packages = build_packages(clips, golds(20), traps(20), StudyConfig{}, 42);
  ASSERT_EQ(packages.size(), 95u);
  for (const auto& p : packages) {
    EXPECT_EQ(p.item_count(), 12u);
    EXPECT_EQ(std::count(p.padding.begin(), p.padding.end(), true), 0);
  }
  check_partition(clips, packages, 10);
}

TEST(BuildPackages, ExactFitAndDeterminism) {
  const auto clips = manifest(10);
  const auto one = build_packages(clips, golds(1), traps(1), StudyConfig{}, 5);
  EXPECT_EQ(one.size(), 1u);
  EXPECT_EQ(build_packages(clips, golds(1), traps(1), StudyConfig{}, 5), one);
  const auto other = build_packages(manifest(300), golds(3), traps(3), StudyConfig{}, 6);
  EXPECT_NE(other, build_packages(manifest(300), golds(3), traps(3), StudyConfig{}, 7));
}

TEST(BuildPackages, PaddingFlagged) {
  const auto clips = manifest(23);
  const auto packages = build_packages(clips, golds(2), traps(2), StudyConfig{}, 8);
  ASSERT_EQ(packages.size(), 3u);
  EXPECT_EQ(std::count(packages[2].padding.begin(), packages[2].padding.end(), true), 7);
  check_partition(clips, packages, 10);
}

TEST(BuildPackages, PartitionPropertyRandomManifests) {
  std::mt19937_64 gen(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + gen() % 120;
    StudyConfig config;
    config.package_size = 1 + gen() % 14;
    const auto clips = manifest(n, "t" + std::to_string(trial) + "_");
    const auto packages = build_packages(clips, golds(1 + gen() % 4), traps(1 + gen() % 4), config, gen());
    ASSERT_EQ(packages.size(), (n + config.package_size - 1) / config.package_size);
    check_partition(clips, packages, config.package_size);
    if (HasFatalFailure()) return;
  }
}

TEST(BuildPackages, ControlsCycleWithoutReplacement) {
  const auto packages = build_packages(manifest(60), golds(3), traps(2), StudyConfig{}, 9);
  ASSERT_EQ(packages.size(), 6u);
  std::set<std::string> first_batch;
  for (int i = 0; i < 3; ++i) first_batch.insert(packages[i].controls[0].clip.clip_id);
  EXPECT_EQ(first_batch.size(), 3u);
}

TEST(BuildPackages, Errors) {
  const auto code = [](auto f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return std::string{};
  };
  EXPECT_EQ(code([] { build_packages(manifest(10), {}, traps(1), StudyConfig{}, 1); }), "empty-pool");
  EXPECT_EQ(code([] { build_packages(manifest(10), golds(1), {}, StudyConfig{}, 1); }), "empty-pool");
  auto dup = manifest(5);
  dup.push_back(dup.front());
  EXPECT_EQ(code([&] { build_packages(dup, golds(1), traps(1), StudyConfig{}, 1); }), "invalid-argument");
}

TEST(ScaleOrder, FixedTailAndDeterminism) {
  for (int i = 0; i < 200; ++i) {
    const auto o = assign_scale_order("worker" + std::to_string(i), 11, i % 3);
    const auto full = o.presentation();
    EXPECT_EQ(full[5], ScaleId::Signal);
    EXPECT_EQ(full[6], ScaleId::Overall);
    std::set<ScaleId> dims(o.permutation.begin(), o.permutation.end());
    EXPECT_EQ(dims.size(), 5u);
    for (auto s : dims) EXPECT_TRUE(is_dimension(s));
    EXPECT_EQ(assign_scale_order("worker" + std::to_string(i), 11, i % 3), o);
  }
}

TEST(ScaleOrder, UniformOverPermutations) {
  constexpr int kParticipants = 10000;
  std::map<std::array<ScaleId, 5>, int> counts;
  for (int i = 0; i < kParticipants; ++i) ++counts[assign_scale_order("participant-" + std::to_string(i), 2023, 0).permutation];
  ASSERT_EQ(counts.size(), 120u);
  const double p = 1.0 / 120.0;
  const double expected = kParticipants * p;
  const double sigma = std::sqrt(kParticipants * p * (1 - p));
  double chi2 = 0;
  for (const auto& [perm, n] : counts) {
    EXPECT_LT(std::abs(n - expected), 5 * sigma);
    chi2 += (n - expected) * (n - expected) / expected;
  }
  // 119 degrees of freedom: mean 119, sd ~15.4.
  EXPECT_LT(chi2, 119 + 5 * std::sqrt(2.0 * 119));
}

TEST(ScaleOrder, EpochChangesOrderEventually) {
  int changed = 0;
  for (int i = 0; i < 50; ++i) {
    const auto id = "w" + std::to_string(i);
    if (assign_scale_order(id, 1, 0).permutation != assign_scale_order(id, 1, 1).permutation) ++changed;
  }
  EXPECT_GT(changed, 40);
}

TEST(TaskList, RoundTrip) {
  const auto packages = build_packages(manifest(950), golds(4), traps(4), StudyConfig{}, 1);
  std::stringstream ss;
  export_task_list(packages, ss);
  std::string header;
  std::getline(std::stringstream(ss.str()), header);
  EXPECT_EQ(header.rfind("package_id,item_1,", 0), 0u);
  const auto rows = parse_task_list(ss);
  ASSERT_EQ(rows.size(), 95u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].package_id, packages[i].package_id);
    const auto order = presentation_order(packages[i]);
    ASSERT_EQ(rows[i].locators.size(), order.size());
    for (std::size_t j = 0; j < order.size(); ++j) EXPECT_EQ(rows[i].locators[j], order[j].clip->uri);
  }
}

TEST(TaskList, EmptyIsHeaderOnly) {
  std::stringstream ss;
  export_task_list({}, ss);
  const auto text = ss.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_TRUE(parse_task_list(ss).empty());
}

TEST(ClipManifest, RoundTripAndErrors) {
  auto clips = manifest(5);
  clips[1].model_id.reset();
  clips[2].uri = "path with, comma.wav";
  std::stringstream ss;
  write_clip_manifest(clips, ss);
  EXPECT_EQ(read_clip_manifest(ss), clips);

  std::stringstream bad("clip_id,uri,duration_s\nx,x.wav,abc\n");
  EXPECT_THROW(read_clip_manifest(bad), Error);
}
