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
#include <optional>
#include <string>
#include <vector>

namespace p804::cli {

struct Options {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::vector<std::filesystem::path> in;
  std::filesystem::path out = ".";
  std::string level = "clip";
  std::optional<int> factors;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> controls;
  std::optional<std::filesystem::path> packages;
};

/// Relative paths resolve against $P804_DATA_ROOT when it is set.
std::filesystem::path resolve(const std::filesystem::path& p);

int prepare_stimuli(const Options& o);
int build_packages(const Options& o);
int serve(const Options& o);
int validate(const Options& o);
int analyze(const Options& o);
int efa(const Options& o);
int mediation(const Options& o);
int repro(const Options& o);

}  // namespace p804::cli
