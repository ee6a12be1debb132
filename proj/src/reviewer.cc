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

#include "sbstar/reviewer.h"

#include <algorithm>

namespace sbstar {

MissingSet ComputeMissing(const Qrels &qrels, const std::string &topic_id,
                          const DocumentStore &store, const CalState &state) {
  MissingSet missing;
  auto relevant = qrels.Relevant(topic_id, store);
  missing.topic_has_relevant = !relevant.empty();
  auto reviewed = state.ReviewedMask();
  for (DocIndex d : relevant) {
    if (d >= reviewed.size() || !reviewed[d]) missing.docs.push_back(d);
  }
  return missing;
}

Answer OracleAnswer(EntityId entity, const MissingSet &missing,
                    const EntityIncidenceMatrix &matrix) {
  if (missing.empty()) {
    throw InvalidArgument("oracle needs at least one missing document");
  }
  std::size_t present = 0;
  for (DocIndex d : missing.docs) present += matrix.Present(entity, d) ? 1 : 0;
  if (present == missing.docs.size()) return Answer::kYes;
  if (present == 0) return Answer::kNo;
  return Answer::kNotSure;
}

OracleReviewer::OracleReviewer(const EntityIncidenceMatrix &matrix,
                               const MissingSet &missing)
    : matrix_(matrix), missing_(missing) {
  if (missing.empty()) {
    throw InvalidArgument("oracle needs at least one missing document");
  }
}

Answer OracleReviewer::Ask(const Question &question) {
  return OracleAnswer(question.entity, missing_, matrix_);
}

Answer ScriptedReviewer::Ask(const Question &) {
  if (next_ >= answers_.size()) throw InvalidArgument("answer script exhausted");
  return answers_[next_++];
}

Answer AnswerConduit::Ask(const Question &question) {
  std::unique_lock<std::mutex> lock(mu_);
  if (outstanding_) throw InvalidArgument("a question is already outstanding");
  outstanding_ = question;
  answer_.reset();
  cv_.notify_all();
  if (!cv_.wait_for(lock, timeout_, [&] { return answer_.has_value(); })) {
    stalled_ = true;
    outstanding_.reset();
    throw SessionStalled("no answer for \"" + question.label + "\" within timeout");
  }
  Answer answer = *answer_;
  answer_.reset();
  outstanding_.reset();
  return answer;
}

bool AnswerConduit::Post(Answer answer) {
  std::lock_guard<std::mutex> lock(mu_);
  if (!outstanding_ || answer_) return false;
  answer_ = answer;
  cv_.notify_all();
  return true;
}

std::optional<Question> AnswerConduit::Outstanding() const {
  std::lock_guard<std::mutex> lock(mu_);
  return outstanding_;
}

bool AnswerConduit::stalled() const {
  std::lock_guard<std::mutex> lock(mu_);
  return stalled_;
}

}  // namespace sbstar
