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


#include "commands.hpp"

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include "p804/audio.hpp"
#include "p804/domain.hpp"
#include "p804/http_api.hpp"
#include "p804/packaging.hpp"
#include "p804/quality_control.hpp"
#include "p804/session.hpp"
#include "p804/stats/factor.hpp"
#include "p804/stats/mediation.hpp"
#include "p804/stats/reproducibility.hpp"
#include "p804/stats/score_matrix.hpp"
#include "p804/stimuli.hpp"

namespace p804::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kTargetLevelDb = -26.0;

fs::path data_root() {
  const char* root = std::getenv("P804_DATA_ROOT");
  return root && *root ? fs::path(root) : fs::path();
}

StudyConfig load_config(const Options& o, bool required) {
  StudyConfig c;
  if (o.config) {
    c = load_study_config(resolve(*o.config));
  } else if (required) {
    fail("missing-config", "--config is required");
  }
  if (o.seed) c.random_seed = *o.seed;
  validate_study_config(c);
  return c;
}

const fs::path& single_input(const Options& o, const char* what) {
  require(o.in.size() == 1, "invalid-argument", std::string("expected one --in ") + what);
  return o.in.front();
}

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) fail("io", "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) fail("io", "cannot write " + path.string());
}

template <typename Writer>
void write_with(const fs::path& path, Writer&& writer) {
  std::ostringstream s;
  writer(s);
  write_file(path, s.str());
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail("io", "cannot open " + path.string());
  return in;
}

// Records what produced the output directory. No clock values, so reruns are
// byte-identical.
void write_run_record(const fs::path& out, const std::string& command, const StudyConfig& config, const Options& o,
                      Json extra = Json::object()) {
  Json inputs = Json::array();
  for (const auto& p : o.in) inputs.push_back(p.generic_string());
  Json run = {{"command", command}, {"seed", config.random_seed}, {"config", config}, {"inputs", inputs}};
  if (o.controls) run["controls"] = o.controls->generic_string();
  for (auto& [k, v] : extra.items()) run[k] = v;
  write_file(out / "run.json", run.dump(2) + "\n");
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& extension, bool recursive) {
  require(fs::is_directory(dir), "io", dir.string() + " is not a directory");
  std::vector<fs::path> out;
  auto take = [&](const fs::directory_entry& e) {
    if (e.is_regular_file() && e.path().extension() == extension) out.push_back(e.path());
  };
  if (recursive) {
    for (const auto& e : fs::recursive_directory_iterator(dir)) take(e);
  } else {
    for (const auto& e : fs::directory_iterator(dir)) take(e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<TestPackage> load_package_dir(const fs::path& dir) {
  std::vector<TestPackage> out;
  for (const auto& path : sorted_files(dir, ".json", false)) {
    auto in = open_input(path);
    try {
      out.push_back(Json::parse(in).get<TestPackage>());
    } catch (const Json::exception& e) {
      fail("invalid-input", path.string() + ": " + e.what());
    }
  }
  require(!out.empty(), "invalid-input", "no package files in " + dir.string());
  return out;
}

stats::ScoreMatrix load_scores(const fs::path& path) {
  auto in = open_input(path);
  return stats::pivot_scores(read_mos_table(in));
}

Json matrix_rows(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

fs::path resolve(const fs::path& p) {
  if (p.is_absolute()) return p;
  const auto root = data_root();
  return root.empty() ? p : root / p;
}

int prepare_stimuli(const Options& o) {
  const auto config = load_config(o, false);
  const auto in = resolve(single_input(o, "directory of WAV files"));
  const auto out = resolve(o.out);
  const auto files = sorted_files(in, ".wav", true);
  require(!files.empty(), "invalid-input", "no .wav files under " + in.string());

  std::vector<Clip> clips;
  std::size_t warnings = 0;
  std::optional<AudioBuffer> longest;
  for (const auto& file : files) {
    const auto rel = fs::relative(file, in);
    const auto normalized = normalize_level(read_wav(file), kTargetLevelDb);
    warnings += normalized.warning != LevelWarning::None;
    const auto uri = fs::path("stimuli") / "clips" / rel;
    fs::create_directories((out / uri).parent_path());
    write_wav(out / uri, normalized.audio);

    auto stem = (rel.parent_path() / rel.stem()).generic_string();
    std::replace(stem.begin(), stem.end(), '/', '_');
    Clip clip{stem, uri.generic_string(), std::nullopt, std::nullopt, normalized.audio.duration_s()};
    if (rel.has_parent_path()) clip.model_id = rel.begin()->string();
    clips.push_back(clip);
    if (!longest || normalized.audio.size() > longest->size()) longest = normalized.audio;
  }
  write_with(out / "stimuli" / "clips.csv", [&](std::ostream& s) { write_clip_manifest(clips, s); });

  BandwidthCheckOptions bw_options;
  bw_options.seed = config.random_seed;
  const auto set = make_bandwidth_check_set(*longest, bw_options);
  const auto key = bandwidth_key(set);
  Json bandwidth = Json::array();
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    const auto uri = fs::path("stimuli") / "bandwidth" / ("bw_" + std::to_string(i + 1) + ".wav");
    fs::create_directories((out / uri).parent_path());
    write_wav(out / uri, set.samples[i].audio);
    bandwidth.push_back({{"uri", uri.generic_string()}, {"key", key[i]}});
  }
  write_file(out / "stimuli" / "bandwidth.json", Json{{"bandwidth", bandwidth}}.dump(2) + "\n");
  write_run_record(out, "prepare-stimuli", config, o,
                   {{"clips", clips.size()}, {"level_warnings", warnings}, {"target_level_db", kTargetLevelDb}});
  std::cout << "prepared " << clips.size() << " clips and " << set.samples.size() << " bandwidth-check samples\n";
  return 0;
}

int build_packages(const Options& o) {
  const auto config = load_config(o, true);
  const auto clips = read_clip_manifest(resolve(single_input(o, "clip manifest")));
  require(o.controls.has_value(), "invalid-argument", "--controls is required");
  std::vector<ControlQuestion> gold, trapping;
  {
    auto in = open_input(resolve(*o.controls));
    std::vector<ControlQuestion> controls;
    try {
      controls = Json::parse(in).get<std::vector<ControlQuestion>>();
    } catch (const Json::exception& e) {
      fail("invalid-input", o.controls->string() + ": " + e.what());
    }
    for (auto& c : controls) (c.kind == ControlKind::Gold ? gold : trapping).push_back(std::move(c));
  }
  const auto packages = p804::build_packages(clips, gold, trapping, config, config.random_seed);
  const auto out = resolve(o.out);
  for (const auto& pkg : packages) {
    write_file(out / "packages" / (pkg.package_id + ".json"), Json(pkg).dump(2) + "\n");
  }
  write_with(out / "packages" / "tasks.csv", [&](std::ostream& s) { export_task_list(packages, s); });
  write_run_record(out, "build-packages", config, o, {{"packages", packages.size()}});
  std::cout << "wrote " << packages.size() << " packages\n";
  return 0;
}

int serve(const Options& o) {
  const auto config = load_config(o, true);
  const auto catalog_path = resolve(single_input(o, "catalog"));
  auto catalog = load_catalog(catalog_path);
  if (o.packages) catalog.packages = load_package_dir(resolve(*o.packages));
  const auto out = resolve(o.out);
  fs::create_directories(out / "logs");
  write_run_record(out, "serve", config, o, {{"port", o.port}});

  auto log = std::make_shared<EventLog>(out / "logs" / "events.jsonl");
  SessionService service(config, std::move(catalog), log);
  const auto root = data_root().empty() ? catalog_path.parent_path() : data_root();

  // Server threads inherit the blocked mask; a dedicated thread takes the signal.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  HttpApi api(service, root);
  const int port = api.bind(o.host, o.port);
  std::cout << "listening on http://" << o.host << ":" << port << "/v1/" << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    api.stop();
  });
  api.listen();
  if (waiter.joinable()) {
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  }
  return 0;
}

int validate(const Options& o) {
  const auto config = load_config(o, false);
  std::cout << "config: ok\n";
  std::optional<std::vector<TestPackage>> packages;
  if (o.packages) {
    packages = load_package_dir(resolve(*o.packages));
    for (const auto& p : *packages) validate_package(p, config.package_size);
    std::cout << resolve(*o.packages).generic_string() << ": " << packages->size() << " packages ok\n";
  }
  for (const auto& given : o.in) {
    const auto path = resolve(given);
    if (path.extension() == ".csv") {
      std::cout << path.generic_string() << ": " << read_clip_manifest(path).size() << " clips ok\n";
    } else {
      auto catalog = load_catalog(path);
      if (packages) catalog.packages = *packages;
      const SessionService service(config, std::move(catalog));
      std::cout << path.generic_string() << ": catalog ok (" << service.catalog().packages.size() << " packages)\n";
    }
  }
  return 0;
}

int analyze(const Options& o) {
  const auto config = load_config(o, true);
  require(!o.in.empty(), "invalid-argument", "expected at least one --in event log");
  const auto level = mos_level_from_string(o.level);
  std::vector<Submission> submissions;
  for (const auto& path : o.in) {
    const auto subs = submissions_from_events(read_event_log(resolve(path)));
    submissions.insert(submissions.end(), subs.begin(), subs.end());
  }
  std::vector<AcceptanceResult> results;
  for (const auto& s : submissions) results.push_back(accept_submission(s));
  if (config.worker_rejection_threshold) apply_worker_escalation(results, *config.worker_rejection_threshold);
  const auto votes = collect_accepted_votes(submissions, results);
  require(!votes.empty(), "no-accepted-votes", "no accepted votes");
  const auto mos = aggregate_mos(votes, level);

  const auto reports = resolve(o.out) / "reports";
  write_with(reports / "acceptance.csv", [&](std::ostream& s) { write_acceptance_report(results, s); });
  write_with(reports / "submissions.csv", [&](std::ostream& s) { export_submissions_csv(submissions, s); });
  write_with(reports / "votes.csv", [&](std::ostream& s) { write_vote_table(votes, s); });
  write_with(reports / ("mos_" + o.level + ".csv"), [&](std::ostream& s) { write_mos_table(mos, s); });
  const auto accepted = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.accepted; });
  write_run_record(resolve(o.out), "analyze", config, o,
                   {{"level", o.level}, {"submissions", submissions.size()}, {"accepted", accepted}});
  std::cout << "accepted " << accepted << " of " << submissions.size() << " submissions, " << votes.size()
            << " votes\n";
  return 0;
}

int efa(const Options& o) {
  const auto config = load_config(o, false);
  const auto scores = load_scores(resolve(single_input(o, "clip-level MOS table")));
  const auto r = stats::correlation_matrix(scores.values);
  const auto eigenvalues = stats::scree(r);
  const int factors = o.factors ? *o.factors : stats::scree_elbow(eigenvalues);
  const auto n = static_cast<std::size_t>(scores.values.rows());
  const auto solution = stats::efa_ml(r, factors, n, scores.col_labels);
  const auto rotated = stats::varimax(solution.loadings);
  const Eigen::VectorXd variance =
      rotated.loadings.array().square().colwise().sum().transpose() / static_cast<double>(r.rows());

  Json kmo = nullptr;
  if (solution.kmo) {
    kmo = {{"overall", solution.kmo->overall ? Json(*solution.kmo->overall) : Json(nullptr)},
           {"per_variable", vector_json(solution.kmo->per_variable)}};
  }
  Json bartlett = nullptr;
  if (solution.bartlett) {
    bartlett = {{"chi2", solution.bartlett->chi2}, {"df", solution.bartlett->df}, {"p_value", solution.bartlett->p_value}};
  }
  const Json report = {{"variables", scores.col_labels},
                       {"observations", n},
                       {"factors", factors},
                       {"factors_from_scree", !o.factors.has_value()},
                       {"eigenvalues", vector_json(eigenvalues)},
                       {"kmo", kmo},
                       {"bartlett", bartlett},
                       {"loadings", matrix_rows(rotated.loadings)},
                       {"uniquenesses", vector_json(solution.uniquenesses)},
                       {"variance_explained", vector_json(variance)},
                       {"heywood", solution.heywood},
                       {"converged", solution.converged},
                       {"iterations", solution.iterations}};
  const auto out = resolve(o.out);
  write_file(out / "reports" / "efa.json", report.dump(2) + "\n");
  write_run_record(out, "efa", config, o, {{"factors", factors}});
  std::cout << factors << " factors, " << 100.0 * variance.sum() << "% variance explained\n";
  return 0;
}

int mediation(const Options& o) {
  const auto config = load_config(o, false);
  const auto scores = load_scores(resolve(single_input(o, "clip-level MOS table")));
  const auto result = stats::mediation(scores);
  Json effects = Json::array();
  std::ostringstream csv;
  csv << "predictor,total,direct,indirect,a,b\n";
  for (const auto& e : result.effects) {
    effects.push_back({{"predictor", e.predictor},
                       {"total", e.total},
                       {"direct", e.direct},
                       {"indirect", e.indirect},
                       {"a", e.a},
                       {"b", e.b}});
    csv << e.predictor << ',' << Json(e.total).dump() << ',' << Json(e.direct).dump() << ','
        << Json(e.indirect).dump() << ',' << Json(e.a).dump() << ',' << Json(e.b).dump() << '\n';
  }
  const Json report = {{"mediator", result.mediator},
                       {"outcome", result.outcome},
                       {"observations", result.observations},
                       {"effects", effects}};
  const auto out = resolve(o.out);
  write_file(out / "reports" / "mediation.json", report.dump(2) + "\n");
  write_file(out / "reports" / "mediation.csv", csv.str());
  write_run_record(out, "mediation", config, o);
  std::cout << result.effects.size() << " effects over " << result.observations << " clips\n";
  return 0;
}

int repro(const Options& o) {
  const auto config = load_config(o, false);
  require(o.in.size() >= 2, "invalid-argument", "expected at least two --in vote tables");
  const auto level = mos_level_from_string(o.level);
  std::vector<stats::LabeledRun> runs;
  for (const auto& path : o.in) {
    auto in = open_input(resolve(path));
    runs.push_back({path.stem().string(), read_vote_table(in)});
  }
  const auto report = stats::reproducibility_report(runs, level);
  const auto out = resolve(o.out);
  write_with(out / "reports" / ("repro_" + o.level + ".csv"),
             [&](std::ostream& s) { stats::write_reproducibility_report(report, s); });
  write_run_record(out, "repro", config, o, {{"level", o.level}});
  std::cout << runs.size() << " runs compared at " << o.level << " level\n";
  return 0;
}

}  // namespace p804::cli
