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

#ifndef SBSTAR_EVAL_H_
#define SBSTAR_EVAL_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sbstar/bundle.h"
#include "sbstar/cal.h"
#include "sbstar/reviewer.h"
#include "sbstar/sbstar.h"

namespace sbstar {

struct PoolFilter {
  std::size_t min_df = 1;
  double max_df_ratio = 1.0;
};

struct SbstarConfig {
  double alpha_floor = 1e-6;
  // Prior strength: alpha = kappa * max(p_LR, alpha_floor).
  double kappa = 1.0;
  PoolFilter pool;
};

// Post-stop strategies. kBmi keeps reviewing in CAL order, kLr ranks the
// remainder by the stop-point model, kRandom asks randomly chosen entity
// questions, kSbstar asks GBS-selected ones.
enum class Strategy { kBmi, kLr, kRandom, kSbstar };

std::string_view StrategyName(Strategy s);  // "bmi", "lr", "random", "sbstar"
Strategy ParseStrategy(std::string_view name);
bool UsesQuestions(Strategy s);

enum class RunStatus {
  kOk,
  kNoMissing,   // CAL already found every relevant document
  kNoRelevant,  // topic has no relevant documents; skipped
  kFailed,
};

std::string_view RunStatusName(RunStatus s);

struct RunMetrics {
  std::string topic_id;
  Strategy strategy = Strategy::kSbstar;
  double stop_ratio = 0.0;
  std::size_t n_questions = 0;     // budget
  std::size_t questions_asked = 0;
  std::size_t cal_reviewed = 0;
  std::size_t missing = 0;
  // Post-stop metrics over the ranked remainder; set when status is kOk.
  std::optional<double> ap;
  std::optional<std::size_t> last_rel;
  std::size_t effort = 0;
  std::vector<std::size_t> rank_trace;
  RunStatus status = RunStatus::kOk;
  std::string note;
};

struct GridCell {
  Strategy strategy = Strategy::kSbstar;
  double stop_ratio = 0.0;
  std::size_t n_questions = 0;
  double mean_effort = 0.0;
  std::optional<double> map;
  std::optional<double> mean_last_rel;
  std::size_t topics = 0;      // runs contributing to mean_effort
  std::size_t map_topics = 0;  // runs contributing to map / mean_last_rel
  std::size_t failed = 0;
  // Argmin-effort budget within its (strategy, stop_ratio) row.
  bool optimal = false;
};

struct SessionLog {
  std::string topic_id;
  Strategy strategy = Strategy::kSbstar;
  double stop_ratio = 0.0;
  std::size_t n_questions = 0;
  std::vector<QuestionRecord> transcript;
  bool pool_exhausted = false;
};

struct GridOptions {
  std::vector<double> stop_ratios;
  std::vector<std::size_t> question_counts;
  std::vector<Strategy> strategies;
  CalConfig cal;
  SbstarConfig sbstar;
  std::uint64_t seed = 1;
};

struct GridResult {
  std::vector<GridCell> cells;
  std::vector<RunMetrics> runs;
  std::vector<SessionLog> sessions;
};

// Candidate set, missing set and question pool at one CAL stopping point.
struct StopPoint {
  const CalState *cal = nullptr;
  std::vector<DocIndex> candidates;
  MissingSet missing;
  std::vector<EntityId> pool;
  // Positions of relevant docs in the CAL order: needed when nothing is
  // missing.
  std::size_t cal_last_rel = 0;
};

StopPoint MakeStopPoint(const CorpusBundle &bundle, const CalState &cal,
                        const SbstarConfig &config);

// Runs one post-stop strategy from a CAL checkpoint. bmi_order is the full
// CAL review order (stop ratio 1) and is only read for Strategy::kBmi.
RunMetrics EvaluateStrategy(const CorpusBundle &bundle, const StopPoint &point,
                            Strategy strategy, std::size_t n_questions,
                            const SbstarConfig &config, std::uint64_t seed,
                            std::span<const DocIndex> bmi_order = {},
                            SessionLog *log = nullptr);

// Seed for the random-question baseline of one cell.
std::uint64_t CellSeed(std::uint64_t seed, const std::string &topic_id,
                       double stop_ratio, std::size_t n_questions);

// Every (topic, stop_ratio) runs CAL once; every (budget, strategy) then
// runs from that checkpoint. Failures are recorded per run.
GridResult RunGrid(const CorpusBundle &bundle, std::span<const Topic> topics,
                   const GridOptions &options);

// Means per (strategy, stop_ratio, budget) with per-row optimal flags.
// Strategies without questions produce one cell per row at budget 0.
std::vector<GridCell> AggregateCells(const std::vector<RunMetrics> &runs);

nlohmann::json RunsToJson(const std::vector<RunMetrics> &runs);
std::vector<RunMetrics> RunsFromJson(const nlohmann::json &j);

// CSV writers. Output is byte-identical for identical inputs.
std::string HeatmapCsv(const std::vector<GridCell> &cells, Strategy strategy);
std::string CellsCsv(const std::vector<GridCell> &cells);
std::string RunsCsv(const std::vector<RunMetrics> &runs);
std::string ComparisonCsv(const std::vector<GridCell> &cells);
nlohmann::json SessionsJson(const std::vector<SessionLog> &sessions);

// Writes heatmap_<strategy>.csv for question strategies, cells.csv,
// runs.csv, comparison.csv, runs.json and transcripts.json. Throws
// InvalidArgument for an empty result.
void EmitReports(const GridResult &result, const std::filesystem::path &out_dir);

}  // namespace sbstar

#endif  // SBSTAR_EVAL_H_
