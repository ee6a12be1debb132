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

#ifndef SBSTAR_CONFIG_H_
#define SBSTAR_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "sbstar/cal.h"
#include "sbstar/eval.h"

namespace sbstar {

// Stop ratios 0.10, 0.15, ..., 0.80.
std::vector<double> DefaultStopRatios();
// Budgets 10, 20, ..., 100.
std::vector<std::size_t> DefaultQuestionCounts();

// Everything a CLI run needs. Loaded from a JSON file, then overridden by
// flags, validated, and written next to the outputs.
struct RunConfig {
  // Ingest inputs.
  std::string corpus;
  std::string annotations;
  std::string lexicon;
  std::string qrels;
  std::string topics;

  std::string bundle = "bundle";
  std::string output_dir = "out";
  std::string checkpoint;  // CAL checkpoint path for `cal`
  std::string state_dir = "sessions";

  std::vector<std::string> topic_ids;  // empty: all topics
  double stop_ratio = 0.5;
  std::size_t n_questions = 10;
  std::vector<double> stop_ratios = DefaultStopRatios();
  std::vector<std::size_t> question_counts = DefaultQuestionCounts();
  std::vector<std::string> strategies = {"bmi", "lr", "random", "sbstar"};
  std::uint64_t seed = 1;
  CalConfig cal;
  SbstarConfig sbstar;

  // Service.
  std::string host = "127.0.0.1";
  int port = 8080;
  double answer_timeout_seconds = 1800.0;
  std::size_t top_k = 20;
  // Hide rank-of-last-relevant from transcripts (blind human sessions).
  bool blind = false;

  // Throws InvalidArgument naming the offending key.
  void Validate() const;

  nlohmann::json ToJson() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static RunConfig FromJson(const nlohmann::json &j);
  static RunConfig Load(const std::filesystem::path &path);

  GridOptions ToGridOptions() const;
};

}  // namespace sbstar

#endif  // SBSTAR_CONFIG_H_
