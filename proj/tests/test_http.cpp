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

#include <fstream>

#include "support/http_flow.hpp"

namespace {

using fixture::Client;
using fixture::HttpHarness;

TEST(Http, ScriptedParticipantFlow) {
  HttpHarness h;
  const auto failures = fixture::run_scripted_flow(h);
  for (const auto& f : failures) ADD_FAILURE() << f;
  EXPECT_TRUE(failures.empty());
}

TEST(Http, StatusMapping) {
  EXPECT_EQ(p804::http_status_for("unknown-participant"), 404);
  EXPECT_EQ(p804::http_status_for("unknown-session"), 404);
  EXPECT_EQ(p804::http_status_for("certificate-expired"), 409);
  EXPECT_EQ(p804::http_status_for("locked-clip"), 409);
  EXPECT_EQ(p804::http_status_for("incomplete"), 400);
  EXPECT_EQ(p804::http_status_for("io"), 500);
}

TEST(Http, MalformedRequests) {
  HttpHarness h;
  Client c(h.port());
  auto r = c.post_raw("/v1/register", "{not json");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["error"], "bad-request");
  r = c.post("/v1/register", p804::Json::array());
  EXPECT_EQ(r.status, 400);
  r = c.post("/v1/register", {{"participant", "x"}});
  EXPECT_EQ(r.body["error"], "bad-request");
  r = c.get("/v1/next-section");
  EXPECT_EQ(r.status, 400);
  r = c.get("/v1/next-section?participant_id=ghost");
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(r.body["error"], "unknown-participant");
  r = c.get("/v1/session?session_id=ses_999");
  EXPECT_EQ(r.status, 404);
  r = c.get("/v1/stimuli?section=lunch&participant_id=x");
  EXPECT_EQ(r.status, 400);
  r = c.get("/v1/nothing-here");
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(r.body["error"], "not-found");
  c.post("/v1/register", {{"participant_id", "w"}});
  r = c.post("/v1/submit/bandwidth", {{"participant_id", "w"}, {"answers", {"same", "maybe", "same", "same", "same"}}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["error"], "invalid-argument");
  r = c.post("/v1/submit/hearing", {{"participant_id", "w"}, {"answers", {"1"}}});
  EXPECT_EQ(r.body["error"], "answer-count");
}

TEST(Http, AudioStaysInsideRoot) {
  HttpHarness h;
  {
    std::ofstream secret(h.root() / "secret.txt");
    secret << "nope";
  }
  Client c(h.port());
  for (const std::string path : {"/v1/audio/../secret.txt", "/v1/audio/%2e%2e/secret.txt", "/v1/audio/audio/..%2f..%2fsecret.txt"}) {
    const auto r = c.get(path);
    EXPECT_NE(r.status, 200) << path;
    EXPECT_EQ(r.raw.find("nope"), std::string::npos) << path;
  }
}

TEST(Http, ConcurrentClients) {
  HttpHarness h({}, 160);
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      Client c(h.port());
      const auto pid = "cc" + std::to_string(t);
      fixture::certify(h.service(), pid, p804::timestamp_from_seconds(1'700'000'000.0));
      auto r = c.post("/v1/sessions", {{"participant_id", pid}});
      const std::string sid = r.body["session_id"];
      r = c.get("/v1/stimuli?section=rating&session_id=" + sid);
      const std::string pkg = r.body["package_id"];
      for (const auto& it : r.body["items"]) {
        c.post("/v1/submit/playback", {{"session_id", sid}, {"clip_id", it["clip_id"]}, {"seconds", it["duration_s"]}});
      }
      const auto ratings = fixture::passing_ratings(h.service().catalog(), pkg);
      r = c.post("/v1/submit/ratings", {{"session_id", sid}, {"items", fixture::ratings_json(ratings)}});
      if (r.status == 200) ++ok;
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(ok.load(), 8);
  std::set<std::string> packages;
  for (const auto& s : h.service().submissions()) packages.insert(s.package_id);
  EXPECT_EQ(packages.size(), 8u);
}

}  // namespace
