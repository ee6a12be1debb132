// Copyright 2026 The SBSTAR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "sbstar/bundle.h"
#include "sbstar/cal.h"
#include "sbstar/config.h"
#include "sbstar/error.h"
#include "sbstar/eval.h"
#include "sbstar/reviewer.h"
#include "sbstar/service.h"

namespace fs = std::filesystem;
using namespace sbstar;

namespace {

// Flag overrides applied on top of the config file.
class FlagSet {
 public:
  template <typename T, typename Fn>
  void Add(CLI::App *app, const std::string &flag, const std::string &help, Fn set) {
    auto value = std::make_shared<T>();
    CLI::Option *opt = app->add_option(flag, *value, help);
    if constexpr (std::is_same_v<T, std::vector<std::string>> ||
                  std::is_same_v<T, std::vector<double>> ||
                  std::is_same_v<T, std::vector<std::size_t>>) {
      opt->delimiter(',');
    }
    apply_.push_back([opt, value, set](RunConfig &c) {
      if (opt->count() > 0) set(c, *value);
    });
  }

  void AddBool(CLI::App *app, const std::string &flag, const std::string &help,
               std::function<void(RunConfig &)> set) {
    CLI::Option *opt = app->add_flag(flag, help);
    apply_.push_back([opt, set](RunConfig &c) {
      if (opt->count() > 0) set(c);
    });
  }

  void Apply(RunConfig &c) const {
    for (const auto &fn : apply_) fn(c);
  }

 private:
  std::vector<std::function<void(RunConfig &)>> apply_;
};

struct Command {
  CLI::App *app = nullptr;
  std::string config_path;
  FlagSet flags;

  RunConfig Resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : RunConfig::Load(config_path);
    flags.Apply(c);
    c.cal.seed = c.seed;
    c.cal.lr.seed = c.seed;
    c.Validate();
    return c;
  }
};

Command MakeCommand(CLI::App &root, const std::string &name, const std::string &help) {
  Command cmd;
  cmd.app = root.add_subcommand(name, help);
  return cmd;
}

void AddBundleFlag(Command &cmd) {
  cmd.flags.Add<std::string>(cmd.app, "--bundle", "Bundle directory",
                             [](RunConfig &c, const std::string &v) { c.bundle = v; });
}

void AddSeedFlag(Command &cmd) {
  cmd.flags.Add<std::uint64_t>(cmd.app, "--seed", "Random seed",
                               [](RunConfig &c, std::uint64_t v) { c.seed = v; });
}

void AddTopicsFlag(Command &cmd) {
  cmd.flags.Add<std::vector<std::string>>(
      cmd.app, "--topic,--topics", "Topic ids (comma separated; default all)",
      [](RunConfig &c, const std::vector<std::string> &v) { c.topic_ids = v; });
}

std::vector<Topic> SelectTopics(const CorpusBundle &bundle, const RunConfig &c) {
  if (c.topic_ids.empty()) return bundle.topics;
  std::vector<Topic> topics;
  for (const auto &id : c.topic_ids) {
    const Topic *t = bundle.FindTopic(id);
    if (t == nullptr) throw InvalidArgument("unknown topic " + id);
    topics.push_back(*t);
  }
  return topics;
}

std::string RatioName(double r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", r);
  return buf;
}

int RunIngest(const RunConfig &c) {
  if (c.corpus.empty()) throw InvalidArgument("--corpus is required");
  if (c.qrels.empty()) throw InvalidArgument("--qrels is required");
  if (c.topics.empty()) throw InvalidArgument("--topics-file is required");
  IngestInputs inputs;
  inputs.corpus = c.corpus;
  inputs.qrels = c.qrels;
  inputs.topics = c.topics;
  if (!c.annotations.empty()) inputs.annotations = c.annotations;
  if (!c.lexicon.empty()) inputs.lexicon = c.lexicon;
  IngestResult result = IngestBundle(inputs, c.bundle);
  for (const auto &w : result.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << (result.cache_hit ? "cache hit" : "built") << " " << result.bundle_dir.string()
            << " (" << result.documents << " documents, " << result.entities
            << " entities, sha256 " << result.content_hash << ")\n";
  return 0;
}

int RunCalCommand(const RunConfig &c) {
  CorpusBundle bundle = LoadBundle(c.bundle);
  std::vector<Topic> topics = SelectTopics(bundle, c);
  if (!c.checkpoint.empty() && topics.size() != 1) {
    throw InvalidArgument("--out needs exactly one --topic");
  }
  for (const Topic &topic : topics) {
    CalState state = RunCal(bundle.store, bundle.features, topic, bundle.qrels,
                            c.stop_ratio, c.cal);
    fs::path out = c.checkpoint;
    if (out.empty()) {
      fs::create_directories(fs::path(c.bundle) / "checkpoints");
      out = fs::path(c.bundle) / "checkpoints" /
            (topic.topic_id + "_" + RatioName(c.stop_ratio) + ".json");
    }
    SaveCalState(state, bundle.store, out);
    MissingSet missing = ComputeMissing(bundle.qrels, topic.topic_id, bundle.store, state);
    std::size_t found = 0;
    for (const auto &r : state.reviewed) found += r.label;
    std::cout << topic.topic_id << ": reviewed " << state.reviewed.size() << "/"
              << state.num_docs << ", relevant found " << found << ", missing "
              << missing.docs.size() << " -> " << out.string() << "\n";
  }
  return 0;
}

int RunSimulate(const RunConfig &c) {
  CorpusBundle bundle = LoadBundle(c.bundle);
  std::vector<Topic> topics = SelectTopics(bundle, c);
  GridResult result = RunGrid(bundle, topics, c.ToGridOptions());
  EmitReports(result, c.output_dir);
  std::ofstream(fs::path(c.output_dir) / "config.json") << c.ToJson().dump(2) << "\n";
  std::size_t failed = 0;
  for (const auto &m : result.runs) failed += m.status == RunStatus::kFailed ? 1 : 0;
  std::cout << "simulated " << topics.size() << " topics, " << result.runs.size()
            << " runs (" << failed << " failed) -> " << c.output_dir << "\n";
  return 0;
}

int RunReport(const RunConfig &c, const std::string &runs_path) {
  fs::path path = runs_path.empty() ? fs::path(c.output_dir) / "runs.json" : fs::path(runs_path);
  GridResult result;
  result.runs = RunsFromJson(nlohmann::json::parse(ReadFile(path)));
  fs::path transcripts = path.parent_path() / "transcripts.json";
  EmitReports(result, c.output_dir);
  std::cout << "reported " << result.runs.size() << " runs -> " << c.output_dir << "\n";
  (void)transcripts;
  return 0;
}

HttpService *g_service = nullptr;

void HandleSignal(int) {
  if (g_service != nullptr) g_service->Stop();
}

int RunServe(RunConfig c, bool port_flag_given) {
  if (!port_flag_given) {
    if (const char *env = std::getenv("SBSTAR_PORT")) c.port = std::atoi(env);
  }
  c.Validate();
  CorpusBundle bundle = LoadBundle(c.bundle);
  SessionManager manager(bundle, c);
  HttpService service(manager);
  g_service = &service;
  std::signal(SIGINT, HandleSignal);
  std::signal(SIGTERM, HandleSignal);
  std::cout << "serving " << bundle.topics.size() << " topics on http://" << c.host << ":"
            << c.port << " (" << manager.size() << " restored sessions)\n"
            << std::flush;
  bool ok = service.Listen(c.host, c.port);
  g_service = nullptr;
  if (!ok) {
    std::cerr << "error: cannot listen on " << c.host << ":" << c.port << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"sbstar: high-recall review with entity questions"};
  app.require_subcommand(1);

  Command ingest = MakeCommand(app, "ingest", "Build a corpus bundle");
  Command cal = MakeCommand(app, "cal", "Run continuous active learning to a stop ratio");
  Command simulate = MakeCommand(app, "simulate", "Run the simulation grid and write reports");
  Command report = MakeCommand(app, "report", "Regenerate reports from runs.json");
  Command serve = MakeCommand(app, "serve", "Serve live reviewer sessions over HTTP");

  for (Command *cmd : {&ingest, &cal, &simulate, &report, &serve}) {
    cmd->app->add_option("--config", cmd->config_path, "JSON config file");
  }

  auto &f = ingest.flags;
  f.Add<std::string>(ingest.app, "--corpus", "Corpus JSONL",
                     [](RunConfig &c, const std::string &v) { c.corpus = v; });
  f.Add<std::string>(ingest.app, "--annotations", "Annotations JSONL",
                     [](RunConfig &c, const std::string &v) { c.annotations = v; });
  f.Add<std::string>(ingest.app, "--lexicon", "Entity lexicon, one surface form per line",
                     [](RunConfig &c, const std::string &v) { c.lexicon = v; });
  f.Add<std::string>(ingest.app, "--qrels", "Qrels file",
                     [](RunConfig &c, const std::string &v) { c.qrels = v; });
  f.Add<std::string>(ingest.app, "--topics-file", "Topics JSONL",
                     [](RunConfig &c, const std::string &v) { c.topics = v; });
  AddBundleFlag(ingest);

  AddBundleFlag(cal);
  AddTopicsFlag(cal);
  AddSeedFlag(cal);
  cal.flags.Add<double>(cal.app, "--stop-ratio", "Fraction of the collection to review",
                        [](RunConfig &c, double v) { c.stop_ratio = v; });
  cal.flags.Add<std::string>(cal.app, "--out", "Checkpoint path",
                             [](RunConfig &c, const std::string &v) { c.checkpoint = v; });

  AddBundleFlag(simulate);
  AddTopicsFlag(simulate);
  AddSeedFlag(simulate);
  simulate.flags.Add<std::vector<double>>(
      simulate.app, "--stop-ratios", "Stop ratios",
      [](RunConfig &c, const std::vector<double> &v) { c.stop_ratios = v; });
  simulate.flags.Add<std::vector<std::size_t>>(
      simulate.app, "--questions", "Question budgets",
      [](RunConfig &c, const std::vector<std::size_t> &v) { c.question_counts = v; });
  simulate.flags.Add<std::vector<std::string>>(
      simulate.app, "--strategies", "Strategies: bmi, lr, random, sbstar",
      [](RunConfig &c, const std::vector<std::string> &v) { c.strategies = v; });
  simulate.flags.Add<std::string>(simulate.app, "--out", "Output directory",
                                  [](RunConfig &c, const std::string &v) { c.output_dir = v; });
  simulate.flags.Add<std::size_t>(simulate.app, "--min-df", "Minimum entity df in the pool",
                                  [](RunConfig &c, std::size_t v) { c.sbstar.pool.min_df = v; });
  simulate.flags.Add<double>(simulate.app, "--max-df-ratio", "Maximum entity df ratio",
                             [](RunConfig &c, double v) { c.sbstar.pool.max_df_ratio = v; });
  simulate.flags.Add<double>(simulate.app, "--kappa", "Prior strength on alpha",
                             [](RunConfig &c, double v) { c.sbstar.kappa = v; });

  std::string runs_path;
  report.app->add_option("--runs", runs_path, "runs.json from a simulate run");
  report.flags.Add<std::string>(report.app, "--out", "Output directory",
                                [](RunConfig &c, const std::string &v) { c.output_dir = v; });

  AddBundleFlag(serve);
  serve.flags.Add<std::string>(serve.app, "--host", "Bind address",
                               [](RunConfig &c, const std::string &v) { c.host = v; });
  CLI::Option *port_opt = nullptr;
  auto port = std::make_shared<int>(0);
  port_opt = serve.app->add_option("--port", *port, "Port (default $SBSTAR_PORT or 8080)");
  serve.flags.Add<std::string>(serve.app, "--state-dir", "Session persistence directory",
                               [](RunConfig &c, const std::string &v) { c.state_dir = v; });
  serve.flags.Add<std::size_t>(serve.app, "--top-k", "Default ranking size",
                               [](RunConfig &c, std::size_t v) { c.top_k = v; });
  serve.flags.Add<double>(serve.app, "--answer-timeout", "Seconds before a session is stalled",
                          [](RunConfig &c, double v) { c.answer_timeout_seconds = v; });
  serve.flags.AddBool(serve.app, "--blind", "Hide rank-of-last-relevant",
                      [](RunConfig &c) { c.blind = true; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest.app) return RunIngest(ingest.Resolve());
    if (*cal.app) return RunCalCommand(cal.Resolve());
    if (*simulate.app) return RunSimulate(simulate.Resolve());
    if (*report.app) return RunReport(report.Resolve(), runs_path);
    if (*serve.app) {
      RunConfig c = serve.Resolve();
      if (port_opt->count() > 0) c.port = *port;
      return RunServe(c, port_opt->count() > 0);
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
