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

#include "sbstar/config.h"

#include <set>

#include "sbstar/error.h"

namespace sbstar {

using json = nlohmann::json;

std::vector<double> DefaultStopRatios() {
  std::vector<double> ratios;
  for (int percent = 10; percent <= 80; percent += 5) ratios.push_back(percent / 100.0);
  return ratios;
}

std::vector<std::size_t> DefaultQuestionCounts() {
  std::vector<std::size_t> counts;
  for (std::size_t n = 10; n <= 100; n += 10) counts.push_back(n);
  return counts;
}

void RunConfig::Validate() const {
  auto ratio_ok = [](double r) { return r > 0.0 && r <= 1.0; };
  if (!ratio_ok(stop_ratio)) throw InvalidArgument("stop_ratio must lie in (0, 1]");
  for (double r : stop_ratios) {
    if (!ratio_ok(r)) throw InvalidArgument("stop_ratios entries must lie in (0, 1]");
  }
  for (const auto &s : strategies) ParseStrategy(s);
  if (cal.batch_growth <= 0) throw InvalidArgument("batch_growth must be positive");
  if (!(cal.lr.learning_rate > 0.0)) throw InvalidArgument("lr.learning_rate must be positive");
  if (!(cal.lr.l2_lambda >= 0.0)) throw InvalidArgument("lr.l2_lambda must be nonnegative");
  if (cal.lr.max_epochs <= 0) throw InvalidArgument("lr.max_epochs must be positive");
  if (!(cal.lr.tolerance >= 0.0)) throw InvalidArgument("lr.tolerance must be nonnegative");
  if (!(sbstar.alpha_floor > 0.0)) throw InvalidArgument("sbstar.alpha_floor must be positive");
  if (!(sbstar.kappa > 0.0)) throw InvalidArgument("sbstar.kappa must be positive");
  if (!ratio_ok(sbstar.pool.max_df_ratio)) {
    throw InvalidArgument("pool.max_df_ratio must lie in (0, 1]");
  }
  if (port < 0 || port > 65535) throw InvalidArgument("port out of range");
  if (!(answer_timeout_seconds > 0.0)) {
    throw InvalidArgument("answer_timeout_seconds must be positive");
  }
  if (top_k == 0) throw InvalidArgument("top_k must be positive");
}

json RunConfig::ToJson() const {
  return {{"corpus", corpus},
          {"annotations", annotations},
          {"lexicon", lexicon},
          {"qrels", qrels},
          {"topics", topics},
          {"bundle", bundle},
          {"output_dir", output_dir},
          {"checkpoint", checkpoint},
          {"state_dir", state_dir},
          {"topic_ids", topic_ids},
          {"stop_ratio", stop_ratio},
          {"n_questions", n_questions},
          {"stop_ratios", stop_ratios},
          {"question_counts", question_counts},
          {"strategies", strategies},
          {"seed", seed},
          {"batch_growth", cal.batch_growth},
          {"pseudo_negatives", cal.pseudo_negatives},
          {"lr",
           {{"l2_lambda", cal.lr.l2_lambda},
            {"learning_rate", cal.lr.learning_rate},
            {"max_epochs", cal.lr.max_epochs},
            {"tolerance", cal.lr.tolerance}}},
          {"sbstar", {{"alpha_floor", sbstar.alpha_floor}, {"kappa", sbstar.kappa}}},
          {"pool",
           {{"min_df", sbstar.pool.min_df}, {"max_df_ratio", sbstar.pool.max_df_ratio}}},
          {"host", host},
          {"port", port},
          {"answer_timeout_seconds", answer_timeout_seconds},
          {"top_k", top_k},
          {"blind", blind}};
}

namespace {

void RejectUnknown(const json &j, const std::set<std::string> &known,
                   const std::string &where) {
  for (const auto &item : j.items()) {
    if (known.count(item.key()) == 0) {
      throw InvalidArgument("unknown config key " + where + item.key());
    }
  }
}

template <typename T>
void Read(const json &j, const char *key, T *out) {
  if (j.contains(key)) *out = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::FromJson(const json &j) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  RunConfig c;
  const json defaults = c.ToJson();
  std::set<std::string> known;
  for (const auto &item : defaults.items()) known.insert(item.key());
  RejectUnknown(j, known, "");
  try {
    Read(j, "corpus", &c.corpus);
    Read(j, "annotations", &c.annotations);
    Read(j, "lexicon", &c.lexicon);
    Read(j, "qrels", &c.qrels);
    Read(j, "topics", &c.topics);
    Read(j, "bundle", &c.bundle);
    Read(j, "output_dir", &c.output_dir);
    Read(j, "checkpoint", &c.checkpoint);
    Read(j, "state_dir", &c.state_dir);
    Read(j, "topic_ids", &c.topic_ids);
    Read(j, "stop_ratio", &c.stop_ratio);
    Read(j, "n_questions", &c.n_questions);
    Read(j, "stop_ratios", &c.stop_ratios);
    Read(j, "question_counts", &c.question_counts);
    Read(j, "strategies", &c.strategies);
    Read(j, "seed", &c.seed);
    Read(j, "batch_growth", &c.cal.batch_growth);
    Read(j, "pseudo_negatives", &c.cal.pseudo_negatives);
    if (j.contains("lr")) {
      const json &lr = j.at("lr");
      RejectUnknown(lr, {"l2_lambda", "learning_rate", "max_epochs", "tolerance"}, "lr.");
      Read(lr, "l2_lambda", &c.cal.lr.l2_lambda);
      Read(lr, "learning_rate", &c.cal.lr.learning_rate);
      Read(lr, "max_epochs", &c.cal.lr.max_epochs);
      Read(lr, "tolerance", &c.cal.lr.tolerance);
    }
    if (j.contains("sbstar")) {
      const json &sb = j.at("sbstar");
      RejectUnknown(sb, {"alpha_floor", "kappa"}, "sbstar.");
      Read(sb, "alpha_floor", &c.sbstar.alpha_floor);
      Read(sb, "kappa", &c.sbstar.kappa);
    }
    if (j.contains("pool")) {
      const json &pool = j.at("pool");
      RejectUnknown(pool, {"min_df", "max_df_ratio"}, "pool.");
      Read(pool, "min_df", &c.sbstar.pool.min_df);
      Read(pool, "max_df_ratio", &c.sbstar.pool.max_df_ratio);
    }
    Read(j, "host", &c.host);
    Read(j, "port", &c.port);
    Read(j, "answer_timeout_seconds", &c.answer_timeout_seconds);
    Read(j, "top_k", &c.top_k);
    Read(j, "blind", &c.blind);
  } catch (const json::exception &e) {
    throw InvalidArgument(std::string("bad config value: ") + e.what());
  }
  c.cal.seed = c.seed;
  c.cal.lr.seed = c.seed;
  return c;
}

RunConfig RunConfig::Load(const std::filesystem::path &path) {
  json j;
  try {
    j = json::parse(ReadFile(path));
  } catch (const json::parse_error &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return FromJson(j);
}

GridOptions RunConfig::ToGridOptions() const {
  GridOptions options;
  options.stop_ratios = stop_ratios;
  options.question_counts = question_counts;
  for (const auto &s : strategies) options.strategies.push_back(ParseStrategy(s));
  options.cal = cal;
  options.cal.seed = seed;
  options.cal.lr.seed = seed;
  options.sbstar = sbstar;
  options.seed = seed;
  return options;
}

}  // namespace sbstar
