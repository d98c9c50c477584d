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

#include "p804/http_api.hpp"

#include <fstream>
#include <sstream>

#include "httplib.h"
#include "p804/error.hpp"

namespace p804 {

Timestamp system_now() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

int http_status_for(const std::string& code) {
  if (code == "unknown-participant" || code == "unknown-session" || code == "not-found") return 404;
  if (code == "certificate-expired" || code == "wrong-section" || code == "wrong-state" || code == "locked-clip" ||
      code == "no-packages") {
    return 409;
  }
  if (code == "io" || code == "internal") return 500;
  return 400;
}

namespace {

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const std::string& code, const std::string& message,
                const Json& extra = Json::object()) {
  Json body = {{"error", code}, {"message", message}};
  body.update(extra);
  send_json(res, body, http_status_for(code));
}

Handler guarded(Handler inner) {
  return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
    try {
      inner(req, res);
    } catch (const RedirectError& e) {
      send_error(res, e.code(), e.what(), {{"redirect", std::string(to_string(e.redirect()))}});
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const Json::exception& e) {
      send_error(res, "bad-request", e.what());
    } catch (const std::exception& e) {
      send_error(res, "internal", e.what());
    }
  };
}

Json body_of(const httplib::Request& req) {
  Json j = Json::parse(req.body);
  require(j.is_object(), "bad-request", "request body must be a JSON object");
  return j;
}

std::string query(const httplib::Request& req, const std::string& key) {
  require(req.has_param(key), "bad-request", "missing query parameter '" + key + "'");
  return req.get_param_value(key);
}

Json decision_json(const SectionDecision& d) {
  return {{"next", std::string(to_string(d.next))}, {"reasons", d.reasons}};
}

Json optional_cert(const std::optional<Certificate>& c) { return c ? Json(*c) : Json(nullptr); }

}  // namespace

HttpApi::HttpApi(SessionService& service, std::filesystem::path audio_root, Clock clock)
    : service_(service), audio_root_(std::move(audio_root)), clock_(std::move(clock)),
      server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

HttpApi::~HttpApi() { stop(); }

int HttpApi::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    require(bound > 0, "io", "cannot bind " + host);
    return bound;
  }
  require(server_->bind_to_port(host, port), "io", "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpApi::listen() { server_->listen_after_bind(); }

void HttpApi::stop() {
  if (server_) server_->stop();
}

bool HttpApi::running() const { return server_->is_running(); }

void HttpApi::install_routes() {
  auto& s = *server_;
  auto& svc = service_;
  auto now = [this] { return clock_(); };

  s.Post("/v1/register", guarded([&svc, now](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    const auto pid = body.at("participant_id").get<std::string>();
    svc.register_participant(pid, now());
    send_json(res, {{"participant_id", pid}, {"decision", decision_json(svc.next_section(pid, now()))}});
  }));

  s.Get("/v1/next-section", guarded([&svc, now](const httplib::Request& req, httplib::Response& res) {
    const auto pid = query(req, "participant_id");
    send_json(res, decision_json(svc.next_section(pid, now())));
  }));

  s.Get("/v1/certificates", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, svc.certificates(query(req, "participant_id")));
  }));

  s.Post("/v1/sessions", guarded([&svc, now](const httplib::Request& req, httplib::Response& res) {
    const auto pid = body_of(req).at("participant_id").get<std::string>();
    const auto sid = svc.open_session(pid, now());
    const auto view = svc.session(sid);
    send_json(res, {{"session_id", sid}, {"state", std::string(to_string(view.state))}});
  }));

  s.Get("/v1/session", guarded([&svc, now](const httplib::Request& req, httplib::Response& res) {
    const auto v = svc.refresh_session(query(req, "session_id"), now());
    send_json(res, {{"session_id", v.session_id},
                    {"participant_id", v.participant_id},
                    {"state", std::string(to_string(v.state))},
                    {"package_id", v.package_id ? Json(*v.package_id) : Json(nullptr)}});
  }));

  s.Get("/v1/stimuli", guarded([&svc, now](const httplib::Request& req, httplib::Response& res) {
    const auto section = query(req, "section");
    if (section == "qualification") {
      const auto pid = query(req, "participant_id");
      send_json(res, {{"hearing", svc.hearing_stimuli(pid)}, {"bandwidth", svc.bandwidth_stimuli(pid)}});
    } else if (section == "setup") {
      const auto pid = query(req, "participant_id");
      Json pairs = Json::array();
      for (const auto& [a, b] : svc.jnd_stimuli(pid)) pairs.push_back({{"a", a}, {"b", b}});
      send_json(res, {{"jnd", pairs}, {"loudness_sample", svc.catalog().loudness_sample}});
    } else if (section == "training") {
      const auto [clips, order] = svc.training_stimuli(query(req, "participant_id"));
      send_json(res, {{"clips", clips}, {"scale_order", order}, {"loudness_sample", svc.catalog().loudness_sample}});
    } else if (section == "rating") {
      const auto view = svc.rating_stimuli(query(req, "session_id"), now());
      Json items = Json::array();
      for (const auto& it : view.items) {
        items.push_back({{"clip_id", it.clip_id}, {"uri", it.uri}, {"duration_s", it.duration_s}});
      }
      send_json(res, {{"session_id", view.session_id},
                      {"package_id", view.package_id},
                      {"items", items},
                      {"scale_order", view.scale_order}});
    } else {
      fail("bad-request", "unknown section '" + section + "'");
    }
  }));

  s.Post("/v1/submit/hearing", guarded([&svc, now](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    const auto out = svc.submit_hearing_test(body.at("participant_id").get<std::string>(),
                                             body.at("answers").get<std::vector<std::string>>(), now());
    send_json(res, {{"passed", out.passed},
                    {"correct", out.correct},
                    {"total", out.total},
                    {"qualification", optional_cert(out.qualification)}});
  }));

  s.Post("/v1/submit/bandwidth", guarded([&svc, now](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    std::vector<PairAnswer> answers;
    for (const auto& a : body.at("answers")) answers.push_back(pair_answer_from_string(a.get<std::string>()));
    const auto out = svc.submit_bandwidth_check(body.at("participant_id").get<std::string>(), answers, now());
    send_json(res, {{"passed", out.passed},
                    {"inattentive", out.inattentive},
                    {"detected", std::string(to_string(out.detected))},
                    {"qualification", optional_cert(out.qualification)}});
  }));

  s.Post("/v1/submit/jnd", guarded([&svc, now](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    std::vector<PairChoice> answers;
    for (const auto& a : body.at("answers")) {
      const auto v = a.get<std::string>();
      require(v == "a" || v == "b", "bad-request", "JND answers must be 'a' or 'b'");
      answers.push_back(v == "a" ? PairChoice::A : PairChoice::B);
    }
    const auto out = svc.submit_jnd_setup(body.at("participant_id").get<std::string>(), answers, now());
    send_json(res, {{"passed", out.passed},
                    {"correct", out.correct},
                    {"attempts", out.attempts},
                    {"certificate", optional_cert(out.certificate)}});
  }));

  s.Post("/v1/submit/training", guarded([&svc, now](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    const auto out = svc.submit_training(body.at("participant_id").get<std::string>(),
                                         body.at("ratings").get<std::vector<RatingVector>>(), now());
    Json feedback = Json::array();
    for (const auto& clip : out.feedback) {
      Json cells = Json::array();
      for (const auto& c : clip) {
        cells.push_back({{"scale", c.scale}, {"vote", c.vote}, {"reference", c.reference}, {"ok", c.ok}});
      }
      feedback.push_back(cells);
    }
    send_json(res, {{"feedback", feedback}, {"certificate", out.certificate}, {"training_epoch", out.training_epoch}});
  }));

  s.Post("/v1/submit/playback", guarded([&svc, now](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    const auto out = svc.report_playback(body.at("session_id").get<std::string>(), body.at("clip_id").get<std::string>(),
                                         body.at("seconds").get<double>(), now());
    send_json(res, {{"clip_id", out.clip_id},
                    {"played_s", out.played_s},
                    {"duration_s", out.duration_s},
                    {"unlocked", out.unlocked}});
  }));

  s.Post("/v1/submit/ratings", guarded([&svc, now](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    std::vector<ItemRating> items;
    for (const auto& it : body.at("items")) {
      items.push_back({it.at("clip_id").get<std::string>(), it.at("ratings").get<RatingVector>()});
    }
    const auto sub = svc.submit_ratings(body.at("session_id").get<std::string>(), items, now());
    send_json(res, {{"submission_id", sub.submission_id}, {"package_id", sub.package_id}});
  }));

  s.Get("/v1/export/log", guarded([&svc](const httplib::Request&, httplib::Response& res) {
    std::ostringstream out;
    export_submissions_csv(svc.submissions(), out);
    res.set_content(out.str(), "text/csv");
  }));

  s.Get("/v1/export/events", guarded([&svc](const httplib::Request&, httplib::Response& res) {
    std::string out;
    for (const auto& e : svc.log().snapshot()) out += e.dump() + "\n";
    res.set_content(out, "application/x-ndjson");
  }));

  s.Get(R"(/v1/audio/(.+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::filesystem::path rel(req.matches[1].str());
    for (const auto& part : rel) {
      require(part != ".." && !rel.is_absolute(), "bad-request", "invalid audio path");
    }
    const auto path = audio_root_ / rel;
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("not-found", "no audio at '" + rel.string() + "'");
    std::ostringstream data;
    data << in.rdbuf();
    res.set_content(data.str(), "audio/wav");
  }));

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      res.set_content(Json{{"error", "not-found"}, {"message", "no such route"}}.dump(), "application/json");
    }
  });
}

}  // namespace p804
