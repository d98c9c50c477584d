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


#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "commands.hpp"
#include "p804/error.hpp"

namespace {

using p804::cli::Options;

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

void add_config(CLI::App* cmd, Options& o, bool required) {
  cmd->add_option("--config", o.config, required ? "Study config JSON (required)" : "Study config JSON");
  cmd->add_option("--seed", o.seed, "Override the config's random seed");
}

void add_out(CLI::App* cmd, Options& o) {
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
}

void add_level(CLI::App* cmd, Options& o) {
  cmd->add_option("--level", o.level, "Aggregation level")
      ->check(CLI::IsMember({"clip", "model"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crowdsourced multi-dimensional speech quality toolkit.", "p804kit"};
  app.set_version_flag("--version", "p804kit " P804KIT_VERSION);
  app.require_subcommand(1);
  app.footer("Environment:\n  P804_DATA_ROOT  base directory for relative input and output paths");

  Options o;
  auto* prepare = app.add_subcommand("prepare-stimuli", "Level-normalize clips and generate the bandwidth check");
  add_config(prepare, o, false);
  prepare->add_option("--in", o.in, "Directory of mono WAV clips; subdirectories name models")->expected(1)->required();
  add_out(prepare, o);

  auto* build = app.add_subcommand("build-packages", "Partition a clip manifest into test packages");
  add_config(build, o, true);
  build->add_option("--in", o.in, "Clip manifest CSV")->expected(1)->required();
  build->add_option("--controls", o.controls, "Gold and trapping questions JSON")->required();
  add_out(build, o);

  auto* serve = app.add_subcommand("serve", "Run the participant HTTP API");
  add_config(serve, o, true);
  serve->add_option("--in", o.in, "Stimulus catalog JSON")->expected(1)->required();
  serve->add_option("--packages", o.packages, "Directory of package files replacing the catalog's packages");
  add_out(serve, o);
  serve->add_option("--host", o.host, "Listen address")->capture_default_str();
  serve->add_option("--port", o.port, "Listen port, 0 for any free port")
      ->check(CLI::Range(0, 65535))
      ->capture_default_str();

  auto* validate = app.add_subcommand("validate", "Check a config, catalogs, manifests and package files");
  add_config(validate, o, false);
  validate->add_option("--in", o.in, "Catalog JSON or clip manifest CSV (repeatable)");
  validate->add_option("--packages", o.packages, "Directory of package files");

  auto* analyze = app.add_subcommand("analyze", "Screen submissions and aggregate MOS");
  add_config(analyze, o, true);
  analyze->add_option("--in", o.in, "Event log JSONL (repeatable)")->required();
  add_out(analyze, o);
  add_level(analyze, o);

  auto* efa = app.add_subcommand("efa", "Maximum-likelihood factor analysis with varimax rotation");
  add_config(efa, o, false);
  efa->add_option("--in", o.in, "Clip-level MOS table")->expected(1)->required();
  efa->add_option("--factors", o.factors, "Number of factors (default: scree elbow)")->check(CLI::PositiveNumber);
  add_out(efa, o);

  auto* mediation = app.add_subcommand("mediation", "Dimension effects on Overall through Signal");
  add_config(mediation, o, false);
  mediation->add_option("--in", o.in, "Clip-level MOS table")->expected(1)->required();
  add_out(mediation, o);

  auto* repro = app.add_subcommand("repro", "Pairwise MOS correlation across runs");
  add_config(repro, o, false);
  repro->add_option("--in", o.in, "Vote table per run (repeatable, at least two)")->required();
  add_out(repro, o);
  add_level(repro, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    if (*prepare) return p804::cli::prepare_stimuli(o);
    if (*build) return p804::cli::build_packages(o);
    if (*serve) return p804::cli::serve(o);
    if (*validate) return p804::cli::validate(o);
    if (*analyze) return p804::cli::analyze(o);
    if (*efa) return p804::cli::efa(o);
    if (*mediation) return p804::cli::mediation(o);
    if (*repro) return p804::cli::repro(o);
  } catch (const p804::Error& e) {
    std::cerr << "error: " << e.code() << ": " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 1;
}
