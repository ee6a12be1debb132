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

#ifndef SBSTAR_TRANSCRIPT_H_
#define SBSTAR_TRANSCRIPT_H_

#include <vector>

#include "json.hpp"
#include "sbstar/sbstar.h"

namespace sbstar {

// [{"entity": label, "answer": "yes"|"no"|"not_sure", "last_rel_after": n}],
// with last_rel_after omitted when unknown or when include_ranks is false.
nlohmann::json TranscriptToJson(const std::vector<QuestionRecord> &transcript,
                                bool include_ranks = true);

// Answers in transcript order, for replays.
std::vector<Answer> TranscriptAnswers(const nlohmann::json &transcript);

}  // namespace sbstar

#endif  // SBSTAR_TRANSCRIPT_H_
