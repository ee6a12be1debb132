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

#include <fstream>
#include <set>

#include "sbstar/bundle.h"
#include "sbstar/config.h"
#include "sbstar/error.h"
#include "sbstar/eval.h"
#include "sbstar/metrics.h"
#include "synthetic.h"

namespace sbstar {
namespace {

namespace fs = std::filesystem;

class EvalTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    testing::SyntheticSpec spec;
    spec.num_docs = 300;
    spec.num_topics = 3;
    spec.relevant_per_topic = 15;
    spec.generic_entities = 40;
    spec.seed = 11;
    bundle_ = new CorpusBundle(testing::MakeSyntheticBundle(spec));
  }
  static void TearDownTestSuite() { delete bundle_; }

  static GridOptions Options() {
    GridOptions o;
    o.stop_ratios = {0.3, 0.1};
    o.question_counts = {0, 5, 15};
    o.strategies = {Strategy::kBmi, Strategy::kLr, Strategy::kRandom, Strategy::kSbstar};
    return o;
  }

  static CorpusBundle *bundle_;
};
CorpusBundle *EvalTest::bundle_ = nullptr;

TEST(StrategyTest, Names) {
  for (Strategy s : {Strategy::kBmi, Strategy::kLr, Strategy::kRandom, Strategy::kSbstar}) {
    EXPECT_EQ(ParseStrategy(StrategyName(s)), s);
  }
  EXPECT_TRUE(UsesQuestions(Strategy::kRandom));
  EXPECT_FALSE(UsesQuestions(Strategy::kLr));
  EXPECT_THROW(ParseStrategy("oracle"), InvalidArgument);
}

TEST(StrategyTest, CellSeedsDiffer) {
  EXPECT_EQ(CellSeed(1, "T0", 0.2, 10), CellSeed(1, "T0", 0.2, 10));
  EXPECT_NE(CellSeed(1, "T0", 0.2, 10), CellSeed(1, "T1", 0.2, 10));
  EXPECT_NE(CellSeed(1, "T0", 0.2, 10), CellSeed(1, "T0", 0.25, 10));
  EXPECT_NE(CellSeed(1, "T0", 0.2, 10), CellSeed(2, "T0", 0.2, 10));
}

TEST_F(EvalTest, GridCoversEveryCombination) {
  GridResult r = RunGrid(*bundle_, bundle_->topics, Options());
  // Per topic and stop: bmi + lr + 3 random + 3 sbstar.
  EXPECT_EQ(r.runs.size(), 3u * 2 * 8);
  for (const auto &m : r.runs) {
    EXPECT_NE(m.status, RunStatus::kFailed) << m.note;
    if (!UsesQuestions(m.strategy)) EXPECT_EQ(m.n_questions, 0u);
    EXPECT_LE(m.questions_asked, m.n_questions);
    if (m.status == RunStatus::kOk) {
      EXPECT_EQ(m.effort, m.cal_reviewed + *m.last_rel + m.questions_asked);
      EXPECT_EQ(m.rank_trace.size(), m.questions_asked);
    }
  }
  GridResult again = RunGrid(*bundle_, bundle_->topics, Options());
  EXPECT_EQ(RunsToJson(r.runs), RunsToJson(again.runs));
}

TEST_F(EvalTest, ZeroBudgetMatchesLrAndBmiMatchesCalOrder) {
  GridResult r = RunGrid(*bundle_, bundle_->topics, Options());
  std::map<std::tuple<std::string, double, std::string, std::size_t>, RunMetrics> by;
  for (const auto &m : r.runs) {
    by[{m.topic_id, m.stop_ratio, std::string(StrategyName(m.strategy)), m.n_questions}] = m;
  }
  for (const Topic &t : bundle_->topics) {
    for (double stop : {0.1, 0.3}) {
      const auto &lr = by[{t.topic_id, stop, "lr", 0}];
      const auto &sb = by[{t.topic_id, stop, "sbstar", 0}];
      const auto &rnd = by[{t.topic_id, stop, "random", 0}];
      EXPECT_EQ(lr.last_rel, sb.last_rel);
      EXPECT_EQ(lr.ap, sb.ap);
      EXPECT_EQ(lr.last_rel, rnd.last_rel);
    }
    // BMI's post-stop ranking is the continuation of the full CAL run.
    CalState full = RunCal(bundle_->store, bundle_->features, t, bundle_->qrels, 1.0, {});
    CalState stop = RunCal(bundle_->store, bundle_->features, t, bundle_->qrels, 0.3, {});
    auto order = full.ReviewOrder();
    std::vector<DocIndex> rest(order.begin() + stop.reviewed.size(), order.end());
    auto point = MakeStopPoint(*bundle_, stop, {});
    if (point.missing.empty()) continue;
    const auto &bmi = by[{t.topic_id, 0.3, "bmi", 0}];
    EXPECT_EQ(*bmi.last_rel, LastRel(rest, point.missing.docs));
  }
}

TEST_F(EvalTest, OptimalFlagIsRowArgmin) {
  GridResult r = RunGrid(*bundle_, bundle_->topics, Options());
  std::map<std::pair<int, double>, std::vector<const GridCell *>> rows;
  for (const auto &c : r.cells) rows[{static_cast<int>(c.strategy), c.stop_ratio}].push_back(&c);
  EXPECT_EQ(rows.size(), 8u);
  for (const auto &[key, cells] : rows) {
    const GridCell *best = nullptr;
    int flagged = 0;
    for (const GridCell *c : cells) {
      flagged += c->optimal;
      if (best == nullptr || c->mean_effort < best->mean_effort) best = c;
    }
    EXPECT_EQ(flagged, 1);
    EXPECT_TRUE(best->optimal);
  }
}

TEST_F(EvalTest, FailuresAreRecordedPerRun) {
  std::vector<Topic> topics = bundle_->topics;
  topics.push_back({"ghost", "nothing here"});
  GridOptions o = Options();
  o.strategies = {Strategy::kSbstar};
  GridResult r = RunGrid(*bundle_, topics, o);
  std::size_t failed = 0;
  for (const auto &m : r.runs) failed += m.status == RunStatus::kFailed;
  EXPECT_EQ(failed, 2u * 3);
  EXPECT_EQ(r.runs.size(), 4u * 2 * 3);
  for (const auto &c : r.cells) EXPECT_EQ(c.failed, 1u);
}

TEST_F(EvalTest, RejectsEmptyGrid) {
  GridOptions o = Options();
  o.stop_ratios.clear();
  EXPECT_THROW(RunGrid(*bundle_, bundle_->topics, o), InvalidArgument);
  o = Options();
  o.question_counts.clear();
  EXPECT_THROW(RunGrid(*bundle_, bundle_->topics, o), InvalidArgument);
  o.strategies = {Strategy::kLr};
  EXPECT_NO_THROW(RunGrid(*bundle_, bundle_->topics, o));
}

TEST_F(EvalTest, ReportsRoundTrip) {
  GridResult r = RunGrid(*bundle_, bundle_->topics, Options());
  auto back = RunsFromJson(RunsToJson(r.runs));
  EXPECT_EQ(RunsToJson(back), RunsToJson(r.runs));
  EXPECT_EQ(CellsCsv(AggregateCells(back)), CellsCsv(r.cells));

  std::string heat = HeatmapCsv(r.cells, Strategy::kSbstar);
  std::istringstream in(heat);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);  // comment, header, two stops
  EXPECT_EQ(lines[0][0], '#');
  EXPECT_EQ(lines[1], "stop_ratio,0,5,15,optimal_n_questions");
  EXPECT_EQ(lines[2].rfind("0.1,", 0), 0u);

  std::string cmp = ComparisonCsv(r.cells);
  EXPECT_NE(cmp.find("map_sbstar"), std::string::npos);
  EXPECT_NE(cmp.find("\navg,"), std::string::npos);

  fs::path dir = testing::TempDir("sbstar-reports");
  EmitReports(r, dir);
  for (const char *f : {"heatmap_sbstar.csv", "heatmap_random.csv", "cells.csv", "runs.csv",
                        "comparison.csv", "runs.json", "transcripts.json"}) {
    EXPECT_TRUE(fs::is_regular_file(dir / f)) << f;
  }
  // Budget-free baselines have no heatmap.
  EXPECT_FALSE(fs::exists(dir / "heatmap_lr.csv"));
  EXPECT_THROW(EmitReports(GridResult{}, dir), InvalidArgument);
  fs::remove_all(dir);
}

TEST(ConfigTest, DefaultsAreValid) {
  RunConfig c;
  EXPECT_NO_THROW(c.Validate());
  EXPECT_EQ(c.stop_ratios.size(), 15u);
  EXPECT_DOUBLE_EQ(c.stop_ratios.front(), 0.10);
  EXPECT_DOUBLE_EQ(c.stop_ratios.back(), 0.80);
  EXPECT_EQ(c.question_counts, (std::vector<std::size_t>{10, 20, 30, 40, 50, 60, 70, 80, 90, 100}));
}

TEST(ConfigTest, JsonRoundTripAndValidation) {
  RunConfig c;
  c.seed = 5;
  c.stop_ratios = {0.2};
  c.sbstar.pool.min_df = 3;
  c.cal.lr.max_epochs = 50;
  RunConfig back = RunConfig::FromJson(c.ToJson());
  EXPECT_EQ(back.ToJson(), c.ToJson());
  EXPECT_EQ(back.cal.seed, 5u);
  EXPECT_EQ(back.cal.lr.seed, 5u);

  EXPECT_THROW(RunConfig::FromJson({{"stop_ratioo", 0.2}}), InvalidArgument);
  EXPECT_THROW(RunConfig::FromJson({{"lr", {{"momentum", 1}}}}), InvalidArgument);
  EXPECT_THROW(RunConfig::FromJson({{"seed", "x"}}), InvalidArgument);
  EXPECT_THROW(RunConfig::FromJson({{"stop_ratio", 1.5}}).Validate(), InvalidArgument);
  EXPECT_THROW(RunConfig::FromJson({{"strategies", {"oracle"}}}).Validate(), InvalidArgument);
  EXPECT_THROW(RunConfig::FromJson({{"pool", {{"max_df_ratio", 0}}}}).Validate(),
               InvalidArgument);

  GridOptions g = RunConfig::FromJson({{"strategies", {"lr", "sbstar"}}}).ToGridOptions();
  EXPECT_EQ(g.strategies, (std::vector<Strategy>{Strategy::kLr, Strategy::kSbstar}));
}

class BundleTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::TempDir("sbstar-bundle");
    testing::SyntheticSpec spec;
    spec.num_docs = 60;
    spec.num_topics = 2;
    spec.relevant_per_topic = 5;
    spec.generic_entities = 5;
    corpus_ = testing::MakeSyntheticCorpus(spec);
    testing::WriteSyntheticFiles(corpus_, dir_ / "in");
    inputs_.corpus = dir_ / "in/corpus.jsonl";
    inputs_.annotations = dir_ / "in/annotations.jsonl";
    inputs_.qrels = dir_ / "in/qrels.txt";
    inputs_.topics = dir_ / "in/topics.jsonl";
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
  testing::SyntheticCorpus corpus_;
  IngestInputs inputs_;
};

TEST_F(BundleTest, IngestCachesAndLoads) {
  IngestResult first = IngestBundle(inputs_, dir_ / "b");
  EXPECT_FALSE(first.cache_hit);
  EXPECT_EQ(first.documents, 60u);
  EXPECT_EQ(first.content_hash.size(), 64u);
  IngestResult second = IngestBundle(inputs_, dir_ / "b");
  EXPECT_TRUE(second.cache_hit);
  EXPECT_EQ(second.content_hash, first.content_hash);

  CorpusBundle b = LoadBundle(dir_ / "b");
  CorpusBundle direct = MakeBundle(corpus_.store, corpus_.annotations, corpus_.qrels,
                                   corpus_.topics);
  EXPECT_EQ(b.store.size(), 60u);
  EXPECT_EQ(b.matrix.labels(), direct.matrix.labels());
  EXPECT_EQ(b.features.terms(), direct.features.terms());
  EXPECT_EQ(b.features.idf(), direct.features.idf());
  for (DocIndex d = 0; d < 60; ++d) {
    ASSERT_EQ(b.features.row(d).size(), direct.features.row(d).size());
    for (std::size_t i = 0; i < b.features.row(d).size(); ++i) {
      EXPECT_EQ(b.features.row(d)[i].term, direct.features.row(d)[i].term);
      EXPECT_DOUBLE_EQ(b.features.row(d)[i].weight, direct.features.row(d)[i].weight);
    }
  }
  EXPECT_EQ(b.qrels.judgments(), direct.qrels.judgments());
  ASSERT_NE(b.FindTopic("T1"), nullptr);
  EXPECT_EQ(b.FindTopic("T1")->title_text, corpus_.topics[1].title_text);

  // Changing an input invalidates the cache.
  std::ofstream(*inputs_.annotations, std::ios::app)
      << "{\"external_id\":\"doc0\",\"entities\":[\"Extra\"]}\n";
  IngestResult third = IngestBundle(inputs_, dir_ / "b");
  EXPECT_FALSE(third.cache_hit);
  EXPECT_NE(third.content_hash, first.content_hash);
  EXPECT_TRUE(LoadBundle(dir_ / "b").matrix.Find("Extra").has_value());
}

TEST_F(BundleTest, LexiconAnnotation) {
  std::ofstream(dir_ / "in/lexicon.txt") << "t0k1\nt1k2\n";
  inputs_.annotations.reset();
  inputs_.lexicon = dir_ / "in/lexicon.txt";
  IngestResult r = IngestBundle(inputs_, dir_ / "lex");
  CorpusBundle b = LoadBundle(dir_ / "lex");
  EXPECT_LE(b.matrix.num_entities(), 2u);
  EXPECT_EQ(r.entities, b.matrix.num_entities());
}

TEST_F(BundleTest, MissingFileNamesTheInput) {
  inputs_.qrels = dir_ / "nope.txt";
  try {
    IngestBundle(inputs_, dir_ / "b");
    FAIL();
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("qrels file not found"), std::string::npos);
  }
  EXPECT_THROW(LoadBundle(dir_ / "absent"), Error);
}

}  // namespace
}  // namespace sbstar
