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

#include <filesystem>
#include <functional>
#include <memory>
#include <string>

#include "p804/session.hpp"

namespace httplib {
class Server;
}

namespace p804 {

using Clock = std::function<Timestamp()>;

Timestamp system_now();

/// JSON-over-HTTP front end for a SessionService. Every route lives under
/// /v1/. Errors come back as {"error": code, "message": ...} plus "redirect"
/// for expired certificates.
class HttpApi {
 public:
  HttpApi(SessionService& service, std::filesystem::path audio_root, Clock clock = system_now);
  ~HttpApi();

  HttpApi(const HttpApi&) = delete;
  HttpApi& operator=(const HttpApi&) = delete;

  /// Binds to host:port (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();
  bool running() const;

 private:
  void install_routes();

  SessionService& service_;
  std::filesystem::path audio_root_;
  Clock clock_;
  std::unique_ptr<httplib::Server> server_;
};

int http_status_for(const std::string& error_code);

}  // namespace p804
