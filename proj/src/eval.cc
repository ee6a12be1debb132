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

#include "sbstar/eval.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "sbstar/error.h"
#include "sbstar/metrics.h"
#include "sbstar/transcript.h"

namespace sbstar {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr Strategy kAllStrategies[] = {Strategy::kBmi, Strategy::kLr,
                                       Strategy::kRandom, Strategy::kSbstar};

std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t SplitMix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string Fixed(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

std::string Ratio(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

std::string Optional(const std::optional<double> &x) {
  return x ? Fixed(*x) : std::string();
}

RunMetrics FailedRun(const std::string &topic_id, Strategy strategy,
                     double stop_ratio, std::size_t n_questions,
                     const std::string &why) {
  RunMetrics m;
  m.topic_id = topic_id;
  m.strategy = strategy;
  m.stop_ratio = stop_ratio;
  m.n_questions = n_questions;
  m.status = RunStatus::kFailed;
  m.note = why;
  return m;
}

void WriteText(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kBmi:
      return "bmi";
    case Strategy::kLr:
      return "lr";
    case Strategy::kRandom:
      return "random";
    case Strategy::kSbstar:
      return "sbstar";
  }
  return "sbstar";
}

Strategy ParseStrategy(std::string_view name) {
  for (Strategy s : kAllStrategies) {
    if (StrategyName(s) == name) return s;
  }
  throw InvalidArgument("unknown strategy \"" + std::string(name) +
                        "\" (expected bmi, lr, random or sbstar)");
}

bool UsesQuestions(Strategy s) {
  return s == Strategy::kRandom || s == Strategy::kSbstar;
}

std::string_view RunStatusName(RunStatus s) {
  switch (s) {
    case RunStatus::kOk:
      return "ok";
    case RunStatus::kNoMissing:
      return "no_missing";
    case RunStatus::kNoRelevant:
      return "no_relevant";
    case RunStatus::kFailed:
      return "failed";
  }
  return "failed";
}

namespace {

RunStatus ParseRunStatus(std::string_view name) {
  for (RunStatus s : {RunStatus::kOk, RunStatus::kNoMissing,
                      RunStatus::kNoRelevant, RunStatus::kFailed}) {
    if (RunStatusName(s) == name) return s;
  }
  throw FormatError("unknown run status " + std::string(name));
}

}  // namespace

StopPoint MakeStopPoint(const CorpusBundle &bundle, const CalState &cal,
                        const SbstarConfig &config) {
  StopPoint point;
  point.cal = &cal;
  point.candidates = cal.Unreviewed();
  point.missing = ComputeMissing(bundle.qrels, cal.topic_id, bundle.store, cal);
  if (!point.candidates.empty()) {
    point.pool = FilterEntityPool(bundle.matrix, point.candidates,
                                  config.pool.min_df, config.pool.max_df_ratio);
  }
  for (std::size_t i = 0; i < cal.reviewed.size(); ++i) {
    if (cal.reviewed[i].label == 1) point.cal_last_rel = i + 1;
  }
  return point;
}

std::uint64_t CellSeed(std::uint64_t seed, const std::string &topic_id,
                       double stop_ratio, std::size_t n_questions) {
  std::uint64_t h = SplitMix(seed ^ Fnv1a(topic_id));
  h = SplitMix(h ^ Fnv1a(Ratio(stop_ratio)));
  return SplitMix(h ^ n_questions);
}

RunMetrics EvaluateStrategy(const CorpusBundle &bundle, const StopPoint &point,
                            Strategy strategy, std::size_t n_questions,
                            const SbstarConfig &config, std::uint64_t seed,
                            std::span<const DocIndex> bmi_order,
                            SessionLog *log) {
  const CalState &cal = *point.cal;
  RunMetrics m;
  m.topic_id = cal.topic_id;
  m.strategy = strategy;
  m.stop_ratio = cal.stop_ratio;
  m.n_questions = UsesQuestions(strategy) ? n_questions : 0;
  m.cal_reviewed = cal.reviewed.size();
  m.missing = point.missing.docs.size();

  if (!point.missing.topic_has_relevant) {
    m.status = RunStatus::kNoRelevant;
    m.note = "topic has no relevant documents";
    return m;
  }
  if (point.missing.empty()) {
    // Nothing left to find: no questions are asked.
    m.status = RunStatus::kNoMissing;
    m.effort = TotalEffort(m.cal_reviewed, 0, 0, point.cal_last_rel);
    m.note = "all relevant documents found during CAL";
    return m;
  }

  std::vector<DocIndex> ranking;
  if (strategy == Strategy::kBmi) {
    if (bmi_order.size() != bundle.store.size()) {
      throw InvalidArgument("BMI baseline needs the full CAL review order");
    }
    ranking.assign(bmi_order.begin() + static_cast<std::ptrdiff_t>(m.cal_reviewed),
                   bmi_order.end());
  } else {
    Belief belief = InitBelief(cal.relevance_probs, point.candidates,
                               config.alpha_floor, config.kappa);
    if (strategy == Strategy::kLr) {
      ranking = FinalRanking(belief, cal.relevance_probs);
    } else {
      QuestionPool pool(bundle.matrix, belief.candidates(), point.pool);
      OracleReviewer oracle(bundle.matrix, point.missing);
      SessionResult result =
          strategy == Strategy::kSbstar
              ? RunSession(belief, pool, oracle, n_questions, cal.relevance_probs,
                           point.missing.docs)
              : RunRandomSession(belief, pool, oracle, n_questions,
                                 cal.relevance_probs, seed, point.missing.docs);
      ranking = std::move(result.ranking);
      m.questions_asked = result.transcript.size();
      for (const auto &q : result.transcript) {
        m.rank_trace.push_back(q.last_rel_after.value_or(0));
      }
      if (result.pool_exhausted) m.note = "question pool exhausted";
      if (log != nullptr) {
        log->topic_id = cal.topic_id;
        log->strategy = strategy;
        log->stop_ratio = cal.stop_ratio;
        log->n_questions = n_questions;
        log->transcript = std::move(result.transcript);
        log->pool_exhausted = result.pool_exhausted;
      }
    }
  }
  m.ap = AveragePrecision(ranking, point.missing.docs);
  m.last_rel = LastRel(ranking, point.missing.docs);
  m.effort = TotalEffort(m.cal_reviewed, m.questions_asked, *m.last_rel,
                         point.cal_last_rel);
  return m;
}

GridResult RunGrid(const CorpusBundle &bundle, std::span<const Topic> topics,
                   const GridOptions &options) {
  if (options.stop_ratios.empty()) throw InvalidArgument("no stop ratios given");
  if (options.strategies.empty()) throw InvalidArgument("no strategies given");
  const bool any_questions =
      std::any_of(options.strategies.begin(), options.strategies.end(), UsesQuestions);
  if (any_questions && options.question_counts.empty()) {
    throw InvalidArgument("no question counts given");
  }
  std::vector<double> stops = options.stop_ratios;
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  const bool want_bmi = std::find(options.strategies.begin(), options.strategies.end(),
                                  Strategy::kBmi) != options.strategies.end();
  std::vector<double> snapshot_ratios = stops;
  if (want_bmi && snapshot_ratios.back() != 1.0) snapshot_ratios.push_back(1.0);

  auto budgets_for = [&](Strategy s) {
    return UsesQuestions(s) ? options.question_counts : std::vector<std::size_t>{0};
  };

  GridResult result;
  for (const Topic &topic : topics) {
    std::vector<CalState> snapshots;
    try {
      snapshots = RunCalSnapshots(bundle.store, bundle.features, topic, bundle.qrels,
                                  snapshot_ratios, options.cal);
    } catch (const std::exception &e) {
      for (double stop : stops) {
        for (Strategy s : options.strategies) {
          for (std::size_t nq : budgets_for(s)) {
            result.runs.push_back(FailedRun(topic.topic_id, s, stop, nq,
                                            std::string("CAL failed: ") + e.what()));
          }
        }
      }
      continue;
    }
    std::vector<DocIndex> bmi_order;
    if (want_bmi) bmi_order = snapshots.back().ReviewOrder();

    for (std::size_t i = 0; i < stops.size(); ++i) {
      const CalState &cal = snapshots[i];
      StopPoint point = MakeStopPoint(bundle, cal, options.sbstar);
      for (Strategy s : options.strategies) {
        for (std::size_t nq : budgets_for(s)) {
          try {
            SessionLog log;
            RunMetrics m = EvaluateStrategy(
                bundle, point, s, nq, options.sbstar,
                CellSeed(options.seed, topic.topic_id, stops[i], nq), bmi_order, &log);
            if (UsesQuestions(s) && m.status == RunStatus::kOk) {
              result.sessions.push_back(std::move(log));
            }
            result.runs.push_back(std::move(m));
          } catch (const std::exception &e) {
            result.runs.push_back(FailedRun(topic.topic_id, s, stops[i], nq, e.what()));
          }
        }
      }
    }
  }
  result.cells = AggregateCells(result.runs);
  return result;
}

std::vector<GridCell> AggregateCells(const std::vector<RunMetrics> &runs) {
  struct Acc {
    double effort = 0.0, ap = 0.0, last_rel = 0.0;
    std::size_t topics = 0, map_topics = 0, failed = 0;
  };
  std::map<std::tuple<int, double, std::size_t>, Acc> acc;
  for (const auto &m : runs) {
    auto &a = acc[{static_cast<int>(m.strategy), m.stop_ratio, m.n_questions}];
    switch (m.status) {
      case RunStatus::kFailed:
        ++a.failed;
        break;
      case RunStatus::kNoRelevant:
        break;
      case RunStatus::kOk:
        a.ap += m.ap.value_or(0.0);
        a.last_rel += static_cast<double>(m.last_rel.value_or(0));
        ++a.map_topics;
        [[fallthrough]];
      case RunStatus::kNoMissing:
        a.effort += static_cast<double>(m.effort);
        ++a.topics;
        break;
    }
  }

  std::vector<GridCell> cells;
  for (const auto &[key, a] : acc) {
    GridCell c;
    c.strategy = static_cast<Strategy>(std::get<0>(key));
    c.stop_ratio = std::get<1>(key);
    c.n_questions = std::get<2>(key);
    c.topics = a.topics;
    c.map_topics = a.map_topics;
    c.failed = a.failed;
    if (a.topics > 0) c.mean_effort = a.effort / static_cast<double>(a.topics);
    if (a.map_topics > 0) {
      c.map = a.ap / static_cast<double>(a.map_topics);
      c.mean_last_rel = a.last_rel / static_cast<double>(a.map_topics);
    }
    cells.push_back(c);
  }

  // Cells are sorted by (strategy, stop, budget): rows are contiguous.
  for (std::size_t begin = 0; begin < cells.size();) {
    std::size_t end = begin;
    while (end < cells.size() && cells[end].strategy == cells[begin].strategy &&
           cells[end].stop_ratio == cells[begin].stop_ratio) {
      ++end;
    }
    std::optional<std::size_t> best;
    for (std::size_t i = begin; i < end; ++i) {
      if (cells[i].topics == 0) continue;
      if (!best || cells[i].mean_effort < cells[*best].mean_effort) best = i;
    }
    if (best) cells[*best].optimal = true;
    begin = end;
  }
  return cells;
}

json RunsToJson(const std::vector<RunMetrics> &runs) {
  json out = json::array();
  for (const auto &m : runs) {
    json row = {{"topic_id", m.topic_id},
                {"strategy", std::string(StrategyName(m.strategy))},
                {"stop_ratio", m.stop_ratio},
                {"n_questions", m.n_questions},
                {"questions_asked", m.questions_asked},
                {"cal_reviewed", m.cal_reviewed},
                {"missing", m.missing},
                {"effort", m.effort},
                {"rank_trace", m.rank_trace},
                {"status", std::string(RunStatusName(m.status))},
                {"note", m.note}};
    row["ap"] = m.ap ? json(*m.ap) : json(nullptr);
    row["last_rel"] = m.last_rel ? json(*m.last_rel) : json(nullptr);
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<RunMetrics> RunsFromJson(const json &j) {
  std::vector<RunMetrics> runs;
  try {
    for (const auto &row : j) {
      RunMetrics m;
      m.topic_id = row.at("topic_id").get<std::string>();
      m.strategy = ParseStrategy(row.at("strategy").get<std::string>());
      m.stop_ratio = row.at("stop_ratio").get<double>();
      m.n_questions = row.at("n_questions").get<std::size_t>();
      m.questions_asked = row.at("questions_asked").get<std::size_t>();
      m.cal_reviewed = row.at("cal_reviewed").get<std::size_t>();
      m.missing = row.at("missing").get<std::size_t>();
      m.effort = row.at("effort").get<std::size_t>();
      m.rank_trace = row.at("rank_trace").get<std::vector<std::size_t>>();
      m.status = ParseRunStatus(row.at("status").get<std::string>());
      m.note = row.value("note", "");
      if (!row.at("ap").is_null()) m.ap = row["ap"].get<double>();
      if (!row.at("last_rel").is_null()) m.last_rel = row["last_rel"].get<std::size_t>();
      runs.push_back(std::move(m));
    }
  } catch (const json::exception &e) {
    throw FormatError(std::string("malformed runs file: ") + e.what());
  }
  return runs;
}

std::string HeatmapCsv(const std::vector<GridCell> &cells, Strategy strategy) {
  std::set<double> stops;
  std::set<std::size_t> budgets;
  std::map<std::pair<double, std::size_t>, const GridCell *> by_key;
  for (const auto &c : cells) {
    if (c.strategy != strategy) continue;
    stops.insert(c.stop_ratio);
    budgets.insert(c.n_questions);
    by_key[{c.stop_ratio, c.n_questions}] = &c;
  }
  std::string out =
      "# strategy " + std::string(StrategyName(strategy)) +
      "; mean total effort = documents reviewed during CAL + last_rel of the "
      "post-stop ranking + questions asked\n";
  out += "stop_ratio";
  for (std::size_t b : budgets) out += "," + std::to_string(b);
  out += ",optimal_n_questions\n";
  for (double stop : stops) {
    out += Ratio(stop);
    std::string optimal;
    for (std::size_t b : budgets) {
      out += ',';
      auto it = by_key.find({stop, b});
      if (it == by_key.end() || it->second->topics == 0) continue;
      out += Fixed(it->second->mean_effort);
      if (it->second->optimal) optimal = std::to_string(b);
    }
    out += "," + optimal + "\n";
  }
  return out;
}

std::string CellsCsv(const std::vector<GridCell> &cells) {
  std::string out =
      "strategy,stop_ratio,n_questions,mean_effort,map,mean_last_rel,topics,"
      "map_topics,failed,optimal\n";
  for (const auto &c : cells) {
    out += std::string(StrategyName(c.strategy)) + "," + Ratio(c.stop_ratio) + "," +
           std::to_string(c.n_questions) + "," +
           (c.topics > 0 ? Fixed(c.mean_effort) : std::string()) + "," +
           Optional(c.map) + "," + Optional(c.mean_last_rel) + "," +
           std::to_string(c.topics) + "," + std::to_string(c.map_topics) + "," +
           std::to_string(c.failed) + "," + (c.optimal ? "1" : "0") + "\n";
  }
  return out;
}

std::string RunsCsv(const std::vector<RunMetrics> &runs) {
  std::string out =
      "topic_id,strategy,stop_ratio,n_questions,questions_asked,cal_reviewed,"
      "missing,ap,last_rel,effort,status\n";
  for (const auto &m : runs) {
    out += m.topic_id + "," + std::string(StrategyName(m.strategy)) + "," +
           Ratio(m.stop_ratio) + "," + std::to_string(m.n_questions) + "," +
           std::to_string(m.questions_asked) + "," + std::to_string(m.cal_reviewed) +
           "," + std::to_string(m.missing) + "," + Optional(m.ap) + "," +
           (m.last_rel ? std::to_string(*m.last_rel) : std::string()) + "," +
           std::to_string(m.effort) + "," + std::string(RunStatusName(m.status)) +
           "\n";
  }
  return out;
}

std::string ComparisonCsv(const std::vector<GridCell> &cells) {
  std::vector<Strategy> present;
  for (Strategy s : kAllStrategies) {
    if (std::any_of(cells.begin(), cells.end(),
                    [&](const GridCell &c) { return c.strategy == s; })) {
      present.push_back(s);
    }
  }
  std::set<double> stops;
  // (strategy, stop) -> the optimal (or only) cell of that row.
  std::map<std::pair<int, double>, const GridCell *> chosen;
  for (const auto &c : cells) {
    stops.insert(c.stop_ratio);
    if (c.optimal) chosen[{static_cast<int>(c.strategy), c.stop_ratio}] = &c;
  }

  std::string out =
      "# MAP and mean last_rel over documents ranked after the stopping point; "
      "question strategies at their per-row optimal budget\n";
  out += "stop_ratio";
  for (Strategy s : present) out += ",map_" + std::string(StrategyName(s));
  for (Strategy s : present) out += ",last_rel_" + std::string(StrategyName(s));
  for (Strategy s : present) {
    if (UsesQuestions(s)) out += ",budget_" + std::string(StrategyName(s));
  }
  out += "\n";

  std::vector<double> map_sum(present.size(), 0.0), rel_sum(present.size(), 0.0);
  std::vector<std::size_t> map_n(present.size(), 0), rel_n(present.size(), 0);
  for (double stop : stops) {
    std::string maps, rels, budgets;
    for (std::size_t k = 0; k < present.size(); ++k) {
      auto it = chosen.find({static_cast<int>(present[k]), stop});
      const GridCell *c = it == chosen.end() ? nullptr : it->second;
      maps += ",";
      rels += ",";
      if (c != nullptr && c->map) {
        maps += Fixed(*c->map);
        map_sum[k] += *c->map;
        ++map_n[k];
      }
      if (c != nullptr && c->mean_last_rel) {
        rels += Fixed(*c->mean_last_rel);
        rel_sum[k] += *c->mean_last_rel;
        ++rel_n[k];
      }
      if (UsesQuestions(present[k])) {
        budgets += ",";
        if (c != nullptr) budgets += std::to_string(c->n_questions);
      }
    }
    out += Ratio(stop) + maps + rels + budgets + "\n";
  }
  out += "avg";
  for (std::size_t k = 0; k < present.size(); ++k) {
    out += ",";
    if (map_n[k] > 0) out += Fixed(map_sum[k] / static_cast<double>(map_n[k]));
  }
  for (std::size_t k = 0; k < present.size(); ++k) {
    out += ",";
    if (rel_n[k] > 0) out += Fixed(rel_sum[k] / static_cast<double>(rel_n[k]));
  }
  for (Strategy s : present) {
    if (UsesQuestions(s)) out += ",";
  }
  out += "\n";
  return out;
}

json SessionsJson(const std::vector<SessionLog> &sessions) {
  json out = json::array();
  for (const auto &s : sessions) {
    out.push_back({{"topic_id", s.topic_id},
                   {"strategy", std::string(StrategyName(s.strategy))},
                   {"stop_ratio", s.stop_ratio},
                   {"n_questions", s.n_questions},
                   {"pool_exhausted", s.pool_exhausted},
                   {"questions", TranscriptToJson(s.transcript)}});
  }
  return out;
}

void EmitReports(const GridResult &result, const fs::path &out_dir) {
  if (result.runs.empty()) throw InvalidArgument("no runs to report");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw Error("cannot create output directory " + out_dir.string());
  }
  std::vector<GridCell> cells =
      result.cells.empty() ? AggregateCells(result.runs) : result.cells;
  for (Strategy s : kAllStrategies) {
    if (!UsesQuestions(s)) continue;
    if (std::none_of(cells.begin(), cells.end(),
                     [&](const GridCell &c) { return c.strategy == s; })) {
      continue;
    }
    WriteText(out_dir / ("heatmap_" + std::string(StrategyName(s)) + ".csv"),
              HeatmapCsv(cells, s));
  }
  WriteText(out_dir / "cells.csv", CellsCsv(cells));
  WriteText(out_dir / "runs.csv", RunsCsv(result.runs));
  WriteText(out_dir / "comparison.csv", ComparisonCsv(cells));
  WriteText(out_dir / "runs.json", RunsToJson(result.runs).dump(1) + "\n");
  WriteText(out_dir / "transcripts.json", SessionsJson(result.sessions).dump(1) + "\n");
}

}  // namespace sbstar
