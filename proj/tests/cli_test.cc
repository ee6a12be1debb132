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

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "json.hpp"
#include "sbstar/corpus.h"
#include "synthetic.h"

namespace sbstar {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int status;
  std::string output;
};

CliRun Cli(const std::string &args) {
  std::string cmd = std::string(SBSTAR_CLI_PATH) + " " + args + " 2>&1";
  CliRun r{0, ""};
  FILE *pipe = popen(cmd.c_str(), "r");
  char buf[512];
  while (std::fgets(buf, sizeof(buf), pipe) != nullptr) r.output += buf;
  int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::TempDir("sbstar-cli");
    testing::SyntheticSpec spec;
    spec.num_docs = 200;
    spec.num_topics = 2;
    spec.relevant_per_topic = 12;
    spec.generic_entities = 20;
    testing::WriteSyntheticFiles(testing::MakeSyntheticCorpus(spec), dir_ / "in");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string In(const char *name) const { return (dir_ / "in" / name).string(); }
  std::string IngestArgs() const {
    return "ingest --corpus " + In("corpus.jsonl") + " --annotations " +
           In("annotations.jsonl") + " --qrels " + In("qrels.txt") + " --topics-file " +
           In("topics.jsonl") + " --bundle " + (dir_ / "b").string();
  }

  fs::path dir_;
};

TEST_F(CliTest, EndToEnd) {
  CliRun first = Cli(IngestArgs());
  ASSERT_EQ(first.status, 0) << first.output;
  EXPECT_NE(first.output.find("built"), std::string::npos);
  CliRun second = Cli(IngestArgs());
  EXPECT_NE(second.output.find("cache hit"), std::string::npos);

  CliRun cal = Cli("cal --bundle " + (dir_ / "b").string() + " --topic T0 --stop-ratio 0.25");
  ASSERT_EQ(cal.status, 0) << cal.output;
  EXPECT_TRUE(fs::is_regular_file(dir_ / "b/checkpoints/T0_0.25.json"));

  // Config file supplies the grid; a flag overrides the output directory.
  nlohmann::json config = {{"bundle", (dir_ / "b").string()},
                           {"stop_ratios", {0.2, 0.4}},
                           {"question_counts", {2, 4}},
                           {"strategies", {"lr", "sbstar"}},
                           {"output_dir", (dir_ / "ignored").string()}};
  std::ofstream(dir_ / "config.json") << config.dump();
  CliRun sim = Cli("simulate --config " + (dir_ / "config.json").string() + " --out " +
                (dir_ / "out").string());
  ASSERT_EQ(sim.status, 0) << sim.output;
  EXPECT_FALSE(fs::exists(dir_ / "ignored"));
  for (const char *f : {"heatmap_sbstar.csv", "comparison.csv", "runs.json", "config.json"}) {
    EXPECT_TRUE(fs::is_regular_file(dir_ / "out" / f)) << f;
  }
  auto saved = nlohmann::json::parse(ReadFile(dir_ / "out/config.json"));
  EXPECT_EQ(saved.at("output_dir"), (dir_ / "out").string());

  CliRun report = Cli("report --runs " + (dir_ / "out/runs.json").string() + " --out " +
                   (dir_ / "re").string());
  ASSERT_EQ(report.status, 0) << report.output;
  EXPECT_EQ(ReadFile(dir_ / "re/heatmap_sbstar.csv"), ReadFile(dir_ / "out/heatmap_sbstar.csv"));
  EXPECT_EQ(ReadFile(dir_ / "re/comparison.csv"), ReadFile(dir_ / "out/comparison.csv"));
}

TEST_F(CliTest, ErrorsExitNonZero) {
  CliRun missing = Cli("ingest --corpus " + (dir_ / "none.jsonl").string() + " --qrels " +
                    In("qrels.txt") + " --topics-file " + In("topics.jsonl") + " --bundle " +
                    (dir_ / "b").string());
  EXPECT_EQ(missing.status, 1);
  EXPECT_NE(missing.output.find("corpus file not found"), std::string::npos);

  ASSERT_EQ(Cli(IngestArgs()).status, 0);
  CliRun bad_topic = Cli("cal --bundle " + (dir_ / "b").string() + " --topic T7");
  EXPECT_EQ(bad_topic.status, 1);
  CliRun bad_ratio = Cli("simulate --bundle " + (dir_ / "b").string() + " --stop-ratios 1.5");
  EXPECT_EQ(bad_ratio.status, 1);
  std::ofstream(dir_ / "bad.json") << R"({"stop_ratioo": 0.3})";
  CliRun bad_config = Cli("simulate --config " + (dir_ / "bad.json").string());
  EXPECT_EQ(bad_config.status, 1);
  EXPECT_NE(bad_config.output.find("stop_ratioo"), std::string::npos);
  EXPECT_NE(Cli("bogus").status, 0);
}

}  // namespace
}  // namespace sbstar
