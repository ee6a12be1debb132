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

#include "sbstar/transcript.h"

#include "sbstar/error.h"

namespace sbstar {

using json = nlohmann::json;

json TranscriptToJson(const std::vector<QuestionRecord> &transcript,
                      bool include_ranks) {
  json out = json::array();
  for (const auto &record : transcript) {
    json row = {{"entity", record.label},
                {"answer", std::string(AnswerName(record.answer))}};
    if (include_ranks && record.last_rel_after) {
      row["last_rel_after"] = *record.last_rel_after;
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<Answer> TranscriptAnswers(const json &transcript) {
  if (!transcript.is_array()) throw FormatError("transcript must be an array");
  std::vector<Answer> answers;
  for (const auto &row : transcript) {
    if (!row.is_object() || !row.contains("answer") || !row["answer"].is_string()) {
      throw FormatError("transcript row without an answer");
    }
    answers.push_back(ParseAnswer(row["answer"].get<std::string>()));
  }
  return answers;
}

}  // namespace sbstar
